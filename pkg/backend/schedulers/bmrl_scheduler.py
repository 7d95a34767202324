"""
BMRL Scheduler
Decentralized download decisions: every real and virtual SBS learns its
request probability with Boltzmann-Gibbs reinforcement learning
"""

import logging
from typing import Optional

import numpy as np

from core.game_solver import DEFAULT_UTILITY_UNIT, build_game
from core.learning import DEFAULT_CONVERGENCE_TOL, DEFAULT_MAX_ITERATIONS, DEFAULT_WINDOW, run_learning
from models.game import GameSpec
from models.learning import LearningResult, NoiseModel, StepSchedule
from models.metrics import Algorithm, BaselineResult
from models.network import Scenario
from schedulers.base_scheduler import BaseScheduler, backhaul_slack

logger = logging.getLogger(__name__)

# noise sigma as a fraction of |u(c, 1)| when none is configured
DEFAULT_NOISE_FRACTION = 0.01


class BMRLScheduler(BaseScheduler):
    """Runs the learning dynamics on the scenario's game"""

    def __init__(self, step_schedule: StepSchedule, noise_sigma: Optional[float] = None,
                 tol: float = DEFAULT_CONVERGENCE_TOL, window: int = DEFAULT_WINDOW,
                 max_iterations: int = DEFAULT_MAX_ITERATIONS,
                 utility_unit: float = DEFAULT_UTILITY_UNIT, trace: bool = False):
        super().__init__(f"Boltzmann-Gibbs RL (BMRL, kappa {step_schedule.kappa:g})",
                         Algorithm.BMRL)
        self.step_schedule = step_schedule
        self.noise_sigma = noise_sigma
        self.tol = tol
        self.window = window
        self.max_iterations = max_iterations
        self.utility_unit = utility_unit
        self.trace = trace
        self.last_game: Optional[GameSpec] = None
        self.last_learning: Optional[LearningResult] = None

    def noise_for(self, game: GameSpec) -> NoiseModel:
        if self.noise_sigma is not None:
            return NoiseModel(self.noise_sigma)
        return NoiseModel(DEFAULT_NOISE_FRACTION * abs(float(game.u_c[0])))

    def schedule(self, scenario: Scenario, rng: Optional[np.random.Generator] = None,
                 game: Optional[GameSpec] = None) -> BaselineResult:
        """
        Requested amount is the expected one: sum of p_i files and
        sum of p_i * L_i bits. Per-SBS counts round each owner's expected
        count for the slack evaluation.
        """
        demand = scenario.demand
        if demand.total_predicted == 0:
            zeros = (0,) * scenario.sbs_count
            return BaselineResult(self.algorithm, zeros, 0.0, backhaul_slack(scenario, zeros))

        if game is None:
            game = build_game(scenario, unit=self.utility_unit)
        if rng is None:
            rng = np.random.default_rng(scenario.seed)
        learning = run_learning(game, self.step_schedule, self.noise_for(game), rng,
                                tol=self.tol, window=self.window,
                                max_iterations=self.max_iterations, trace=self.trace)
        self.last_game = game
        self.last_learning = learning

        p = learning.profile.p
        owners = np.asarray(game.owners)
        expected = np.bincount(owners, weights=p, minlength=scenario.sbs_count)
        counts = tuple(int(min(round(e), f)) for e, f in zip(expected, demand.file_counts))
        bits = float(np.dot(p, game.file_bits))
        logger.debug("BMRL expected requests %.2f over G=%d players", p.sum(), game.g)

        return BaselineResult(
            algorithm=self.algorithm,
            downloaded=counts,
            requested_bits=bits,
            slack_bps=backhaul_slack(scenario, counts),
            requested_files=float(p.sum()),
        )
