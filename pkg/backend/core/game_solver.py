"""
Game Solver
Builds the binary minority game from a scenario, evaluates pure and mixed
utilities and solves for the fair proper-mixed equilibrium
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import optimize
from scipy.stats import binom

from core.allocation import allocate, compute_phi, priority_shares, required_rates
from core.errors import ModelDomainError, NoInteriorEquilibriumError
from core.netmodel import total_rates
from models.demand import DemandModel
from models.game import Action, Deviation, GameSpec, MixedProfile, NashCheck, PureProfile
from models.network import Scenario

logger = logging.getLogger(__name__)

DEFAULT_UTILITY_UNIT = 1.0
DEFAULT_PMNE_TOL = 1e-9


def _player_layout(demands: DemandModel):
    """
    Owner SBS and priority rank of every player: one real player per SBS
    with at least one predicted file, then the virtual players SBS by SBS
    """
    owners: List[int] = []
    ranks: List[int] = []
    for n, count in enumerate(demands.file_counts):
        if count >= 1:
            owners.append(n)
            ranks.append(0)
    real_count = len(owners)
    for n, count in enumerate(demands.file_counts):
        for rank in range(1, count):
            owners.append(n)
            ranks.append(rank)
    return owners, ranks, real_count


def rate_slack(scenario: Scenario, s: Sequence[int]) -> np.ndarray:
    """Per-SBS r_n - R_n - D_n(s_n) in bits/s under the allocation for s"""
    current, predicted = required_rates(scenario.demand, s)
    rates = total_rates(allocate(scenario, s), scenario)
    return rates - current - predicted


def build_game(scenario: Scenario, phi: Optional[int] = None,
               unit: float = DEFAULT_UTILITY_UNIT) -> GameSpec:
    """
    Tabulate u(c, f_c) for f_c = 1..G by allocating the first f_c files of
    the global priority order. A virtual player has no current requests of
    its own, but it shares the owner SBS's link, so every player reports
    the owner's full slack r_n - R_n - D_n. Tables are in bits/s divided
    by `unit`. The shared table is the mean over players, shifted so that
    u(c, phi) = 0.
    """
    demands = scenario.demand
    g = demands.total_predicted
    if g < 1:
        raise ModelDomainError("the scenario has no predicted files")
    if unit <= 0:
        raise ModelDomainError("utility unit must be > 0")
    if phi is None:
        phi = compute_phi(scenario)

    owners, ranks, real_count = _player_layout(demands)
    slack_by_f = np.empty((g, demands.sbs_count))
    for f in range(1, g + 1):
        slack_by_f[f - 1] = rate_slack(scenario, priority_shares(demands, f))

    player_tables = slack_by_f[:, owners].T / unit
    u_c = player_tables.mean(axis=0)
    asymmetry = float(np.max(np.abs(player_tables - u_c)))
    if 1 <= phi < g:
        u_c = u_c - u_c[phi - 1]

    file_bits = tuple(demands.predicted[n][rank].size_bits for n, rank in zip(owners, ranks))
    game = GameSpec(g=g, phi=phi, u_c=u_c, owners=tuple(owners), real_count=real_count,
                    file_bits=file_bits, player_tables=player_tables,
                    asymmetry=asymmetry, unit=unit)

    violations = game.sign_structure_violations()
    if violations:
        logger.warning("utility table breaks the phi sign structure at %d entries", violations)
    logger.info("Game built: G=%d (%d real), phi=%d, asymmetry=%.4g",
                g, real_count, phi, asymmetry)
    return game


def utility_bmmg(n: int, s_n: int, profile: PureProfile, scenario: Scenario,
                 phi: Optional[int] = None) -> float:
    """
    Utility in bits/s of SBS n playing s_n against the rest of `profile`:
    rate - R_n - D_n above phi, the negation below it and 0 at phi
    """
    if phi is None:
        phi = compute_phi(scenario)
    played = profile.deviate(n, s_n)
    played.validate(scenario.demand.file_counts)
    f_c = played.total
    if f_c == phi:
        return 0.0
    slack = float(rate_slack(scenario, played.s)[n])
    return slack if f_c > phi else -slack


def is_pure_ne(profile: PureProfile, scenario: Scenario, phi: Optional[int] = None,
               tol: float = 1e-6) -> NashCheck:
    """Search every unilateral deviation; the first strict improvement is the witness"""
    profile.validate(scenario.demand.file_counts)
    if phi is None:
        phi = compute_phi(scenario)
    for n, f_n in enumerate(scenario.demand.file_counts):
        current = utility_bmmg(n, profile.s[n], profile, scenario, phi)
        for alternative in range(f_n + 1):
            if alternative == profile.s[n]:
                continue
            gain = utility_bmmg(n, alternative, profile, scenario, phi) - current
            if gain > tol:
                return NashCheck(False, Deviation(n, alternative, gain))
    return NashCheck(True)


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ModelDomainError(f"probability {p} outside [0, 1]")


def _expectation(action: Action, weights: np.ndarray, game: GameSpec) -> float:
    # weights[k]: probability that exactly k opponents request
    if action is Action.REQUEST:
        return float(weights @ game.u_c)
    # G - k players defer when k opponents request
    return float(weights @ game.u_d[::-1])


def expected_utility(action: Action, p: float, game: GameSpec) -> float:
    """Expected utility of `action` when every opponent requests with probability p"""
    _check_probability(p)
    weights = binom.pmf(np.arange(game.g), game.g - 1, p)
    return _expectation(action, weights, game)


def poisson_binomial_pmf(probs: Sequence[float]) -> np.ndarray:
    """Distribution of the number of successes among independent Bernoulli trials"""
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    for i, p in enumerate(probs):
        pmf[1:i + 2] = pmf[1:i + 2] * (1 - p) + pmf[:i + 1] * p
        pmf[0] *= 1 - p
    return pmf


def expected_utility_general(n: int, action: Action, profile: MixedProfile,
                             game: GameSpec) -> float:
    """Exact expected utility of player n against heterogeneous opponents"""
    if profile.p.shape != (game.g,):
        raise ModelDomainError(f"profile must hold G={game.g} probabilities")
    if not 0 <= n < game.g:
        raise ModelDomainError(f"player {n} outside [0, {game.g})")
    weights = poisson_binomial_pmf(np.delete(profile.p, n))
    return _expectation(action, weights, game)


def expected_utilities(profile: MixedProfile, game: GameSpec) -> np.ndarray:
    """(G, 2) array of expected utilities of requesting and deferring per player"""
    result = np.empty((game.g, 2))
    # players sharing a probability face the same opponent distribution
    cache: Dict[float, np.ndarray] = {}
    for i, p_i in enumerate(profile.p):
        key = float(p_i)
        if key not in cache:
            u_c = expected_utility_general(i, Action.REQUEST, profile, game)
            cache[key] = np.array([u_c, -u_c])
        result[i] = cache[key]
    return result


def solve_fair_pmne(game: GameSpec, tol: float = DEFAULT_PMNE_TOL) -> float:
    """
    Common request probability p* in (0, 1) with zero expected utility of
    requesting. The expectation decreases in p, so bisection brackets the
    unique root.
    """
    if tol <= 0:
        raise ModelDomainError("tol must be > 0")
    first, last = float(game.u_c[0]), float(game.u_c[-1])
    if not (first > 0 and last < 0):
        raise NoInteriorEquilibriumError(first, last)

    def request_utility(p: float) -> float:
        return expected_utility(Action.REQUEST, p, game)

    p_star = optimize.bisect(request_utility, 0.0, 1.0, xtol=1e-15, maxiter=200)
    residual = abs(request_utility(p_star))
    if residual >= tol * max(1.0, float(np.max(np.abs(game.u_c)))):
        logger.warning("fair PMNE residual %.3e above tolerance %.1e", residual, tol)
    return float(p_star)


def bmmg_mixed_strategy(file_count: int, p_star: float) -> np.ndarray:
    """Probability that an SBS with `file_count` files requests i of them, i = 0..F_n"""
    if not 0.0 < p_star < 1.0:
        raise ModelDomainError(f"p* must lie in (0, 1), got {p_star}")
    if file_count < 0:
        raise ModelDomainError("file count must be >= 0")
    return binom.pmf(np.arange(file_count + 1), file_count, p_star)


def bmmg_mixed_strategies(demands: DemandModel, p_star: float) -> Dict[int, np.ndarray]:
    return {n: bmmg_mixed_strategy(count, p_star)
            for n, count in enumerate(demands.file_counts) if count >= 1}
