"""
Boltzmann-Gibbs Learning
Smoothed best response, the two-timescale reinforcement step, the logit
equilibrium fixed point and step-schedule checks
"""

import logging
import math
from collections import deque
from typing import Optional, Union

import numpy as np
from scipy import optimize
from scipy.special import softmax

from core.errors import ModelDomainError, NonConvergenceError
from core.game_solver import expected_utilities, expected_utility
from models.game import Action, GameSpec, MixedProfile
from models.learning import (
    LearnerState, LearningResult, NoiseModel, ScheduleReport, StepSchedule, TraceRecord
)

logger = logging.getLogger(__name__)

DEFAULT_BGE_TOL = 1e-10
DEFAULT_BGE_MAX_ITERATIONS = 1_000_000
DEFAULT_CONVERGENCE_TOL = 1e-3
DEFAULT_WINDOW = 50
DEFAULT_MAX_ITERATIONS = 100_000

# Tail growth between successive doublings of the horizon at or above this
# ratio marks a series as divergent
DIVERGENCE_RATIO = 0.95


def smoothed_best_response(u_hat: np.ndarray, kappa: float) -> np.ndarray:
    """Boltzmann-Gibbs probabilities over (c, d); works on (2,) or (G, 2) input"""
    if kappa <= 0:
        raise ModelDomainError("kappa must be > 0")
    u_hat = np.asarray(u_hat, dtype=float)
    if not np.all(np.isfinite(u_hat)):
        raise ModelDomainError("utility estimates must be finite")
    # softmax subtracts the row maximum before exponentiating
    return softmax(kappa * u_hat, axis=-1)


def rl_step(state: LearnerState, action_taken: Union[Action, np.ndarray],
            observed_utility: Union[float, np.ndarray],
            schedule: StepSchedule) -> LearnerState:
    """
    One sub-slot for every player: the estimate of the action taken moves
    toward the observed utility with step alpha(t), the other estimate is
    kept, then p moves toward the smoothed best response with step lambda(t)
    """
    g = state.player_count
    if isinstance(action_taken, Action):
        requested = np.full(g, action_taken is Action.REQUEST)
    else:
        requested = np.asarray(action_taken, dtype=bool)
    observed = np.broadcast_to(np.asarray(observed_utility, dtype=float), (g,))

    t = state.t + 1
    alpha = schedule.alpha(t)
    lambdas = schedule.lambdas(t, g)

    u_hat = state.u_hat.copy()
    rows = np.arange(g)
    cols = np.where(requested, 0, 1)
    u_hat[rows, cols] += alpha * (observed - u_hat[rows, cols])

    beta = smoothed_best_response(u_hat, schedule.kappa_at(t))[:, 0]
    p = np.clip(state.p + lambdas * (beta - state.p), 0.0, 1.0)
    return LearnerState(u_hat, p, t)


def contraction_holds(game: GameSpec, kappa: float) -> bool:
    """kappa <= |sum_k u(c, k + 1)|, under which the logit equilibrium is unique"""
    return kappa <= abs(float(game.u_c.sum()))


def _symmetric_fixed_point(game: GameSpec, kappa: float) -> float:
    """
    Common p with p = beta(u_bar(p)). Every player shares the table, so
    beta - p depends on the common p alone and a bracket finds its root.
    """
    def gap(p: float) -> float:
        u = expected_utility(Action.REQUEST, p, game)
        return float(smoothed_best_response(np.array([u, -u]), kappa)[0]) - p

    if gap(0.0) <= 0.0:
        return 0.0
    if gap(1.0) >= 0.0:
        return 1.0
    return float(optimize.brentq(gap, 0.0, 1.0, xtol=1e-15, maxiter=500))


def bge_fixed_point(game: GameSpec, kappa: float, tol: float = DEFAULT_BGE_TOL,
                    max_iterations: int = DEFAULT_BGE_MAX_ITERATIONS,
                    initial: Optional[np.ndarray] = None) -> MixedProfile:
    """
    Logit equilibrium with |beta(u_bar(p)) - p|_inf < tol.
    Without `initial` the symmetric equilibrium is solved as a scalar root;
    at sharp logits the residual is limited by float resolution and only
    logged. From an `initial` profile it runs the damped iteration
    p <- p + d * (beta(u_bar(p)) - p) with exact expected utilities, halving
    d whenever the residual grows.
    """
    if tol <= 0:
        raise ModelDomainError("tol must be > 0")
    if not contraction_holds(game, kappa):
        logger.warning("kappa=%.4g exceeds |sum u_c|=%.4g; the logit equilibrium "
                       "may not be unique", kappa, abs(float(game.u_c.sum())))

    if initial is None:
        profile = MixedProfile(np.full(game.g, _symmetric_fixed_point(game, kappa)))
        utilities = expected_utilities(profile, game)
        residual = float(np.max(np.abs(smoothed_best_response(utilities, kappa)[:, 0] - profile.p)))
        if residual >= tol:
            logger.warning("logit equilibrium residual %.3e above tol %.1e", residual, tol)
        return profile

    p = np.array(initial, dtype=float)
    if p.shape != (game.g,):
        raise ModelDomainError(f"initial profile must hold G={game.g} probabilities")
    damping = 1.0
    previous = math.inf
    residual = math.inf
    for _ in range(max_iterations):
        utilities = expected_utilities(MixedProfile(p), game)
        target = smoothed_best_response(utilities, kappa)[:, 0]
        residual = float(np.max(np.abs(target - p)))
        if residual < tol:
            return MixedProfile(p)
        if residual > previous:
            damping = max(damping / 2, 1e-6)
        previous = residual
        p = p + damping * (target - p)
    raise NonConvergenceError(max_iterations, residual)


def epsilon_bound(kappa: float) -> float:
    """Largest pure-deviation gain at a logit equilibrium: log(2) / kappa"""
    if kappa <= 0:
        raise ModelDomainError("kappa must be > 0")
    return math.log(2) / kappa


def _realized_utilities(game: GameSpec, requested: np.ndarray) -> np.ndarray:
    count = int(requested.sum())
    # index guards only matter when no player takes that branch
    u_request = game.u_c[max(count, 1) - 1]
    u_defer = game.u_d[max(game.g - count, 1) - 1]
    return np.where(requested, u_request, u_defer)


def run_learning(game: GameSpec, schedule: StepSchedule, noise: NoiseModel,
                 seed: Union[int, np.random.SeedSequence, np.random.Generator, None] = None,
                 tol: float = DEFAULT_CONVERGENCE_TOL, window: int = DEFAULT_WINDOW,
                 max_iterations: int = DEFAULT_MAX_ITERATIONS,
                 trace: bool = False) -> LearningResult:
    """
    Simulate all G players. Each sub-slot every player samples an action,
    observes only its own noisy realized utility and applies rl_step.
    Stops at the first t >= window with |p(t) - p(t - window)|_inf < tol,
    or at max_iterations (flagged unconverged). No run stops before a full
    window of sub-slots has been played.
    """
    if window < 1:
        raise ModelDomainError("window must be >= 1")
    rng = np.random.default_rng(seed)
    state = LearnerState.initial(game.g)
    history = deque([state.p], maxlen=window + 1)
    records = []
    converged = False

    while state.t < max_iterations:
        requested = rng.random(game.g) < state.p
        observed = _realized_utilities(game, requested) + noise.sample(rng, game.g)
        state = rl_step(state, requested, observed, schedule)
        history.append(state.p)

        if trace:
            actions = np.where(requested, Action.REQUEST.value, Action.DEFER.value)
            records.extend(
                TraceRecord(state.t, i, str(actions[i]), float(observed[i]), float(state.p[i]))
                for i in range(game.g)
            )

        # history[0] is p(t - window) once the deque is full
        if state.t >= window and np.max(np.abs(state.p - history[0])) < tol:
            converged = True
            break

    if converged:
        logger.info("Learning converged after %d iterations", state.t)
    else:
        logger.warning("Learning hit the iteration cap (%d) before converging", max_iterations)
    return LearningResult(state.profile(), state.t, converged, records)


def _series_diverges(terms: np.ndarray) -> bool:
    horizon = len(terms)
    tail = terms[horizon // 2:].sum()
    previous_tail = terms[horizon // 4:horizon // 2].sum()
    if previous_tail == 0:
        return False
    return bool(tail / previous_tail >= DIVERGENCE_RATIO)


def _vanishes(ratio: np.ndarray) -> bool:
    last, middle = ratio[-1], ratio[len(ratio) // 2]
    return bool(last == 0 or last < DIVERGENCE_RATIO * middle)


def validate_schedule(schedule: StepSchedule, horizon: int = 1_000_000,
                      players: Optional[int] = None) -> ScheduleReport:
    """
    Numerical check of the step-size conditions over t = 1..horizon.
    Divergence of a series is read from the growth of its tail between
    successive doublings of the horizon; a limit of zero from the ratio
    shrinking over the second half of the horizon.
    """
    if horizon < 8:
        raise ModelDomainError("horizon must be >= 8")
    t = np.arange(1, horizon + 1, dtype=float)
    alpha = schedule.alpha_scale / t ** schedule.alpha_exponent
    exponents = schedule.lambda_exponents
    if exponents is None:
        exponents = (schedule.lambda_exponent,)
    lambdas = [schedule.lambda_scale / t ** e for e in exponents]

    checks = {
        "alpha_sum_diverges": _series_diverges(alpha),
        "alpha_square_summable": not _series_diverges(alpha ** 2),
        "lambda_sum_diverges": all(_series_diverges(lam) for lam in lambdas),
        "lambda_square_summable": all(not _series_diverges(lam ** 2) for lam in lambdas),
        "lambda_alpha_ratio_vanishes": all(_vanishes(lam / alpha) for lam in lambdas),
    }
    identical = len(set(exponents)) == 1
    checks["player_lambdas_ordered"] = identical or all(
        _vanishes(lambdas[i] / lambdas[i + 1]) for i in range(len(lambdas) - 1)
    )
    if players is not None and schedule.lambda_exponents is not None:
        checks["player_lambdas_ordered"] &= len(schedule.lambda_exponents) == players

    measurements = {
        "alpha_partial_sum": float(alpha.sum()),
        "alpha_square_partial_sum": float((alpha ** 2).sum()),
        "lambda_partial_sum": float(min(lam.sum() for lam in lambdas)),
        "lambda_square_partial_sum": float(max((lam ** 2).sum() for lam in lambdas)),
        "lambda_alpha_ratio_at_horizon": float(max(lam[-1] / alpha[-1] for lam in lambdas)),
    }
    report = ScheduleReport(checks, measurements)
    if not report.passed:
        logger.info("Step schedule fails: %s", ", ".join(report.failed()))
    return report
