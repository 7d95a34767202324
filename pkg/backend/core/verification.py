"""
Instance Verification
Named property checks run against one seeded scenario
"""

import logging
from typing import Callable, List, Optional

import numpy as np

from core.allocation import is_feasible, priority_shares
from core.errors import BackhaulError, NoInteriorEquilibriumError
from core.experiment_manager import prepare, step_schedule_from
from core.game_solver import bmmg_mixed_strategies, expected_utilities, expected_utility, solve_fair_pmne
from core.learning import bge_fixed_point, contraction_holds, epsilon_bound, validate_schedule
from models.config import ScenarioConfig
from models.game import Action
from models.metrics import VerificationCheck
from schedulers.cga_scheduler import CGAScheduler
from schedulers.oca_scheduler import OCAScheduler

logger = logging.getLogger(__name__)

# the step-size conditions that separate the two timescales
TIMESCALE_CHECKS = ("alpha_sum_diverges", "alpha_square_summable",
                    "lambda_square_summable", "lambda_alpha_ratio_vanishes")


def _guarded(name: str, check: Callable[[], VerificationCheck]) -> VerificationCheck:
    try:
        return check()
    except BackhaulError as e:
        return VerificationCheck(name, False, f"raised {type(e).__name__}: {e}")


def verify_instance(config: ScenarioConfig, seed: Optional[int] = None) -> List[VerificationCheck]:
    """Run every check; a failing check never stops the ones after it"""
    seed = config.experiment.seed if seed is None else seed
    scenario, phi, game = prepare(config, seed)
    demand = scenario.demand
    total = demand.total_predicted
    kappa = config.learning.kappa
    checks: List[VerificationCheck] = []

    def phi_feasible():
        ok = is_feasible(scenario, priority_shares(demand, phi))
        return VerificationCheck("phi_feasible", ok, f"phi={phi} of {total} files")

    def phi_maximal():
        ok = phi == total or not is_feasible(scenario, priority_shares(demand, phi + 1))
        return VerificationCheck("phi_maximal", ok, f"phi={phi}")

    checks.append(_guarded("phi_feasible", phi_feasible))
    checks.append(_guarded("phi_maximal", phi_maximal))

    oca = OCAScheduler().run(scenario)
    cga = CGAScheduler(overhead_per_sbs=0.0, batch=1).run(scenario)
    checks.append(VerificationCheck("oca_within_phi", oca.total_downloaded <= phi,
                                    f"{oca.total_downloaded} files"))
    checks.append(VerificationCheck("cga_without_overhead_matches_oca",
                                    cga.downloaded == oca.downloaded,
                                    f"oca={oca.downloaded} cga={cga.downloaded}"))
    if len(set(demand.file_counts)) == 1:
        spread = max(oca.downloaded) - min(oca.downloaded)
        checks.append(VerificationCheck("oca_fair_split", spread <= 1, f"spread={spread}"))

    schedule = step_schedule_from(config)
    report = validate_schedule(schedule, horizon=100_000)
    separated = all(report.checks[name] for name in TIMESCALE_CHECKS)
    checks.append(VerificationCheck("step_schedule_timescales", separated,
                                    "failing: " + (", ".join(report.failed()) or "none")))

    if game is None:
        checks.append(VerificationCheck("game", True, "no predicted files; game checks skipped"))
        return checks

    f_c = np.arange(1, game.g)
    antisymmetric = bool(np.all(game.u_d[game.g - f_c - 1] == -game.u_c[f_c]))
    checks.append(VerificationCheck("utility_antisymmetry", antisymmetric))
    violations = game.sign_structure_violations()
    checks.append(VerificationCheck("utility_sign_structure", violations == 0,
                                    f"{violations} entries off the phi sign pattern, "
                                    f"asymmetry {game.asymmetry:.4g}"))

    def fair_pmne():
        try:
            p_star = solve_fair_pmne(game, config.game.pmne_tol)
        except NoInteriorEquilibriumError as e:
            return VerificationCheck("fair_pmne", True, f"no interior equilibrium: {e}")
        grid = np.linspace(0.0, 1.0, 100)
        values = np.array([expected_utility(Action.REQUEST, p, game) for p in grid])
        scale = max(1.0, float(np.max(np.abs(values))))
        decreasing = bool(np.all(np.diff(values) <= 1e-12 * scale))
        residual = abs(expected_utility(Action.REQUEST, p_star, game))
        strategies = bmmg_mixed_strategies(demand, p_star)
        normalized = all(abs(v.sum() - 1.0) < 1e-12 for v in strategies.values())
        # relative to the largest expected utility on the grid
        ok = decreasing and residual < config.game.pmne_tol * scale and normalized
        return VerificationCheck("fair_pmne", ok,
                                 f"p*={p_star:.6g}, residual={residual:.2e}, "
                                 f"decreasing={decreasing}, normalized={normalized}")

    def logit_equilibrium():
        tol = config.learning.bge_tol
        profile = bge_fixed_point(game, kappa, tol)
        utilities = expected_utilities(profile, game)
        p = profile.p
        played = p * utilities[:, 0] + (1 - p) * utilities[:, 1]
        gain = float(np.max(np.max(utilities, axis=1) - played))
        bound = epsilon_bound(kappa)
        scale = max(1.0, float(np.max(np.abs(game.u_c))))
        return VerificationCheck("logit_equilibrium", gain <= bound + 1e-12 * scale,
                                 f"max deviation gain {gain:.4g} <= {bound:.4g}, "
                                 f"contraction={'yes' if contraction_holds(game, kappa) else 'no'}")

    checks.append(_guarded("fair_pmne", fair_pmne))
    checks.append(_guarded("logit_equilibrium", logit_equilibrium))

    failed = [c.name for c in checks if not c.passed]
    if failed:
        logger.warning("Verification failed: %s", ", ".join(failed))
    return checks
