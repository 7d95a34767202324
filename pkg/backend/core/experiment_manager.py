"""
Experiment Manager
Seeded runs of every algorithm, parameter sweeps and the BMRL comparison.
Runs with distinct seeds execute on a thread pool; results are collected
under a lock and reduced in seed order.
"""

import logging
import os
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.allocation import compute_phi
from core.config_loader import apply_overrides
from core.errors import ComparisonError, ConfigError
from core.game_solver import build_game
from core.reporting import write_runs, write_trace
from core.scenario_builder import build_scenario
from models.config import ScenarioConfig
from models.game import Action, GameSpec
from models.learning import StepSchedule, TraceRecord
from models.metrics import AggregateMetrics, Algorithm, ComparisonSummary, RunMetrics
from models.network import Scenario
from schedulers.base_scheduler import BaseScheduler
from schedulers.bmrl_scheduler import BMRLScheduler
from schedulers.cga_scheduler import CGAScheduler
from schedulers.oca_scheduler import OCAScheduler
from schedulers.rfa_scheduler import RFAScheduler

logger = logging.getLogger(__name__)

ALL_ALGORITHMS = (Algorithm.BMRL, Algorithm.OCA, Algorithm.CGA, Algorithm.RFA)

# independent random stream per algorithm within one seed
_STREAMS = {Algorithm.BMRL: 1, Algorithm.OCA: 2, Algorithm.CGA: 3, Algorithm.RFA: 4}

# BMRL matches OCA when the request counts differ by at most this many files
MATCH_TOLERANCE_FILES = 1.0


class SweepAxis(str, Enum):
    FILE_COUNT = "file_count"
    CAPACITY = "capacity"
    KAPPA = "kappa"


def thread_cap() -> int:
    """Worker threads: BMMG_THREADS if set, else the CPU count"""
    raw = os.environ.get("BMMG_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError("BMMG_THREADS", f"expected a positive integer, got '{raw}'")
    if value < 1:
        raise ConfigError("BMMG_THREADS", "must be >= 1")
    return value


def derive_run_seeds(master_seed: int, runs: int) -> List[int]:
    """Per-run seeds spawned from the master seed"""
    children = np.random.SeedSequence(master_seed).spawn(runs)
    return [int(child.generate_state(1)[0]) for child in children]


def step_schedule_from(config: ScenarioConfig) -> StepSchedule:
    learning = config.learning
    return StepSchedule(kappa=learning.kappa, alpha_exponent=learning.alpha_exponent,
                        lambda_exponent=learning.lambda_exponent,
                        kappa_mode=learning.kappa_mode)


def make_scheduler(config: ScenarioConfig, algorithm: Algorithm) -> BaseScheduler:
    if algorithm is Algorithm.OCA:
        return OCAScheduler()
    elif algorithm is Algorithm.CGA:
        return CGAScheduler(config.cga_overhead, config.baselines.cga_batch)
    elif algorithm is Algorithm.RFA:
        return RFAScheduler()
    elif algorithm is Algorithm.BMRL:
        learning = config.learning
        return BMRLScheduler(step_schedule_from(config), noise_sigma=learning.noise_sigma,
                             tol=learning.tol, window=learning.window,
                             max_iterations=learning.max_iterations,
                             utility_unit=config.game.utility_unit, trace=learning.trace)
    raise ConfigError("algorithm", f"unknown algorithm {algorithm}")


def sweep_overrides(axis: SweepAxis, value: float) -> Dict[str, object]:
    if axis is SweepAxis.FILE_COUNT:
        if float(value) != int(value):
            raise ConfigError("demand.predicted_total", f"file count {value} is not an integer")
        return {"demand.predicted_total": int(value)}
    if axis is SweepAxis.CAPACITY:
        return {"backhaul.wired.c_max": float(value), "backhaul.wired.per_mbs": None}
    return {"learning.kappa": float(value)}


def _table_utility(game: Optional[GameSpec], requested_files: float) -> Optional[float]:
    """Shared-table utility of a requester at the rounded request count"""
    if game is None:
        return None
    f = int(round(requested_files))
    if f >= 1:
        return game.realized(Action.REQUEST, min(f, game.g))
    return game.realized(Action.DEFER, 0)


def _execute(config: ScenarioConfig, algorithm: Algorithm, scenario: Scenario, phi: int,
             game: Optional[GameSpec], seed: int,
             axis_value: Optional[float]) -> Tuple[RunMetrics, List[TraceRecord]]:
    scheduler = make_scheduler(config, algorithm)
    rng = np.random.default_rng([seed, _STREAMS[algorithm]])
    iterations, converged, final_p, trace = None, True, (), []

    if isinstance(scheduler, BMRLScheduler):
        result = scheduler.schedule(scenario, rng, game)
        if scheduler.last_learning is not None:
            learning = scheduler.last_learning
            iterations, converged = learning.iterations, learning.converged
            final_p = tuple(float(p) for p in learning.profile.p)
            trace = learning.trace
    else:
        result = scheduler.run(scenario, rng)

    metrics = RunMetrics(
        algorithm=algorithm,
        seed=seed,
        phi=phi,
        requested_files=float(result.requested_files),
        requested_bits=result.requested_bits,
        slack_bps=result.slack_bps,
        downloaded=result.downloaded,
        iterations=iterations,
        converged=converged,
        final_p=final_p,
        utility=_table_utility(game, result.requested_files),
        overhead_bps=result.overhead_bps,
        axis_value=axis_value,
    )
    return metrics, trace


def prepare(config: ScenarioConfig, seed: int) -> Tuple[Scenario, int, Optional[GameSpec]]:
    """Scenario, phi and game for one seed"""
    scenario = build_scenario(config, seed)
    phi = compute_phi(scenario)
    logger.info("phi=%d for seed %d", phi, seed)
    game = None
    if scenario.demand.total_predicted > 0:
        game = build_game(scenario, phi, config.game.utility_unit)
    return scenario, phi, game


def run_scenario(config: ScenarioConfig, algorithm: Algorithm, seed: int) -> RunMetrics:
    """One algorithm on one seeded scenario; deterministic per (config, seed)"""
    scenario, phi, game = prepare(config, seed)
    metrics, _ = _execute(config, algorithm, scenario, phi, game, seed, None)
    return metrics


class ExperimentManager:
    """Thread-safe runner for batches of seeded runs"""

    def __init__(self, config: ScenarioConfig, max_workers: Optional[int] = None):
        self.config = config
        self.max_workers = max_workers or thread_cap()

        # Guards the shared result stores below
        self.manager_lock = threading.Lock()
        self.completed: List[RunMetrics] = []
        self.traces: Dict[Tuple[Optional[float], int], List[TraceRecord]] = {}

    def run_seeds(self) -> List[int]:
        return derive_run_seeds(self.config.experiment.seed, self.config.experiment.runs)

    def run_point(self, config: ScenarioConfig, seed: int,
                  algorithms: Sequence[Algorithm] = ALL_ALGORITHMS,
                  axis_value: Optional[float] = None) -> List[RunMetrics]:
        """All algorithms on one scenario, sharing its phi and game"""
        scenario, phi, game = prepare(config, seed)
        results = []
        for algorithm in algorithms:
            metrics, trace = _execute(config, algorithm, scenario, phi, game, seed, axis_value)
            results.append(metrics)
            if trace:
                with self.manager_lock:
                    self.traces[(axis_value, seed)] = trace
        with self.manager_lock:
            self.completed.extend(results)
        return results

    def run_batch(self, config: ScenarioConfig, seeds: Sequence[int],
                  algorithms: Sequence[Algorithm] = ALL_ALGORITHMS,
                  axis_value: Optional[float] = None) -> List[RunMetrics]:
        """Seeds in parallel; the returned list follows seed order"""
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            batches = list(pool.map(
                lambda seed: self.run_point(config, seed, algorithms, axis_value), seeds
            ))
        return [metrics for batch in batches for metrics in batch]

    def sweep(self, axis: SweepAxis, values: Sequence[float],
              algorithms: Sequence[Algorithm] = ALL_ALGORITHMS) -> List[AggregateMetrics]:
        seeds = self.run_seeds()
        rows: List[AggregateMetrics] = []
        for value in values:
            point_config = apply_overrides(self.config, sweep_overrides(axis, value))
            runs = self.run_batch(point_config, seeds, algorithms, float(value))
            rows.extend(aggregate(runs, float(value)))
            logger.info("Sweep %s=%g done (%d runs)", axis.value, value, len(seeds))
        return rows

    def compare(self, algorithms: Sequence[Algorithm] = ALL_ALGORITHMS
                ) -> Tuple[Dict[Algorithm, List[RunMetrics]], ComparisonSummary]:
        runs = self.run_batch(self.config, self.run_seeds(), algorithms)
        by_algorithm = group_by_algorithm(runs)
        return by_algorithm, compare_report(by_algorithm)

    def write_outputs(self, directory: Path) -> None:
        """Per-run metrics and BMRL traces, written by the calling thread only"""
        directory = Path(directory)
        with self.manager_lock:
            completed = list(self.completed)
            traces = dict(self.traces)
        write_runs(completed, directory / "runs.jsonl")
        for (axis_value, seed), records in traces.items():
            label = "" if axis_value is None else f"axis{axis_value:g}_"
            write_trace(records, directory / f"trace_{label}seed{seed}.jsonl")


def group_by_algorithm(runs: Sequence[RunMetrics]) -> Dict[Algorithm, List[RunMetrics]]:
    grouped: Dict[Algorithm, List[RunMetrics]] = {}
    for metrics in runs:
        grouped.setdefault(metrics.algorithm, []).append(metrics)
    return grouped


def _oca_files(runs: Sequence[RunMetrics]) -> Dict[Tuple[Optional[float], int], float]:
    return {(m.axis_value, m.seed): m.requested_files
            for m in runs if m.algorithm is Algorithm.OCA}


def aggregate(runs: Sequence[RunMetrics], axis_value: float) -> List[AggregateMetrics]:
    """One row per algorithm, in the order algorithms first appear"""
    if not runs:
        return []
    oca = _oca_files(runs)
    frame = pd.DataFrame({
        "algorithm": [m.algorithm.value for m in runs],
        "requested_bits": [m.requested_bits for m in runs],
        "slack_bps": [m.slack_bps for m in runs],
        "iterations": [np.nan if m.iterations is None else m.iterations for m in runs],
        "match": [
            np.nan if (m.axis_value, m.seed) not in oca
            else float(abs(m.requested_files - oca[(m.axis_value, m.seed)]) <= MATCH_TOLERANCE_FILES)
            for m in runs
        ],
    })
    stats = frame.groupby("algorithm", sort=False).agg(
        runs=("requested_bits", "size"),
        mean_requested_bits=("requested_bits", "mean"),
        std_requested_bits=("requested_bits", lambda s: float(np.std(s))),
        mean_slack_bps=("slack_bps", "mean"),
        iterations_mean=("iterations", "mean"),
        oca_match_fraction=("match", "mean"),
    )

    def optional(value) -> Optional[float]:
        return None if pd.isna(value) else float(value)

    return [
        AggregateMetrics(
            axis_value=axis_value,
            algorithm=Algorithm(name),
            runs=int(row.runs),
            mean_requested_bits=float(row.mean_requested_bits),
            std_requested_bits=float(row.std_requested_bits),
            mean_slack_bps=float(row.mean_slack_bps),
            iterations_mean=optional(row.iterations_mean),
            oca_match_fraction=optional(row.oca_match_fraction),
        )
        for name, row in stats.iterrows()
    ]


def _max_improvement(bmrl: Sequence[RunMetrics], other: Sequence[RunMetrics]) -> float:
    """Largest relative gain in mean requested bits over all sweep points"""
    if not other:
        return 0.0
    mine = pd.DataFrame({"axis": [m.axis_value for m in bmrl],
                         "bits": [m.requested_bits for m in bmrl]})
    theirs = pd.DataFrame({"axis": [m.axis_value for m in other],
                           "bits": [m.requested_bits for m in other]})
    means = pd.concat([
        mine.groupby("axis", dropna=False)["bits"].mean().rename("bmrl"),
        theirs.groupby("axis", dropna=False)["bits"].mean().rename("other"),
    ], axis=1)
    means = means[means["other"] > 0]
    if means.empty:
        return 0.0
    return float(max(0.0, (means["bmrl"] / means["other"] - 1.0).max()))


def compare_report(metrics: Mapping[Algorithm, Sequence[RunMetrics]]) -> ComparisonSummary:
    """
    Fraction of runs with BMRL within one file of OCA, and the largest
    relative improvement of BMRL over CGA and RFA across sweep points.
    Every algorithm must cover the same (axis value, seed) pairs.
    """
    for needed in (Algorithm.BMRL, Algorithm.OCA):
        if not metrics.get(needed):
            raise ComparisonError(f"no {needed.value} runs to compare")

    def keys(runs: Sequence[RunMetrics]) -> Counter:
        return Counter((m.axis_value, m.seed) for m in runs)

    reference = keys(metrics[Algorithm.BMRL])
    for algorithm, runs in metrics.items():
        if keys(runs) != reference:
            raise ComparisonError(f"{algorithm.value} runs use a different seed set than bmrl")

    oca = {(m.axis_value, m.seed): m.requested_files for m in metrics[Algorithm.OCA]}
    bmrl = metrics[Algorithm.BMRL]
    matches = [abs(m.requested_files - oca[(m.axis_value, m.seed)]) <= MATCH_TOLERANCE_FILES
               for m in bmrl]

    summary = ComparisonSummary(
        runs=len(bmrl),
        oca_match_fraction=float(np.mean(matches)),
        improvement_over_cga=_max_improvement(bmrl, metrics.get(Algorithm.CGA, [])),
        improvement_over_rfa=_max_improvement(bmrl, metrics.get(Algorithm.RFA, [])),
        mean_requested_bits={a.value: float(np.mean([m.requested_bits for m in runs]))
                             for a, runs in metrics.items()},
    )
    logger.info("Comparison over %d runs: OCA match %.2f", summary.runs, summary.oca_match_fraction)
    return summary


def sweep(config: ScenarioConfig, axis: SweepAxis, values: Sequence[float],
          algorithms: Sequence[Algorithm] = ALL_ALGORITHMS,
          max_workers: Optional[int] = None) -> List[AggregateMetrics]:
    return ExperimentManager(config, max_workers).sweep(axis, values, algorithms)
