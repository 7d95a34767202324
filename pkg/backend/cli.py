"""
Command-line entry point
Run from backend/: python cli.py <command> <config or preset> [options]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from core.allocation import compute_phi
from core.config_loader import apply_overrides, resolve_config
from core.errors import BackhaulError, NoInteriorEquilibriumError
from core.experiment_manager import (
    ALL_ALGORITHMS, ExperimentManager, SweepAxis, prepare, step_schedule_from
)
from core.game_solver import bmmg_mixed_strategies, solve_fair_pmne
from core.learning import bge_fixed_point, epsilon_bound
from core.reporting import write_csv, write_trace
from core.scenario_builder import build_scenario
from core.verification import verify_instance
from schedulers.bmrl_scheduler import BMRLScheduler

logger = logging.getLogger(__name__)


def _parse_overrides(pairs: List[str]) -> dict:
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise BackhaulError(f"--set expects key=value, got '{pair}'")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _load(args):
    config = resolve_config(args.config)
    overrides = _parse_overrides(args.set)
    if getattr(args, "kappa", None) is not None:
        overrides["learning.kappa"] = args.kappa
    if getattr(args, "runs", None) is not None:
        overrides["experiment.runs"] = args.runs
    if getattr(args, "trace", None) is not None:
        overrides["learning.trace"] = True
    if overrides:
        config = apply_overrides(config, overrides)
    seed = args.seed if args.seed is not None else config.experiment.seed
    return config, seed


def cmd_phi(args) -> int:
    config, seed = _load(args)
    scenario = build_scenario(config, seed)
    phi = compute_phi(scenario)
    print(f"phi = {phi} (of {scenario.demand.total_predicted} predicted files)")
    return 0


def cmd_pmne(args) -> int:
    config, seed = _load(args)
    scenario, phi, game = prepare(config, seed)
    if game is None:
        print("no predicted files")
        return 0
    print(f"G = {game.g}, phi = {phi}, asymmetry = {game.asymmetry:.4g}")
    try:
        p_star = solve_fair_pmne(game, config.game.pmne_tol)
    except NoInteriorEquilibriumError as e:
        print(str(e))
        return 0
    print(f"p* = {p_star:.10f}")
    for n, strategy in bmmg_mixed_strategies(scenario.demand, p_star).items():
        probs = " ".join(f"{v:.4f}" for v in strategy)
        print(f"SBS {n} (F={len(strategy) - 1}): {probs}")
    return 0


def cmd_bge(args) -> int:
    config, seed = _load(args)
    _, phi, game = prepare(config, seed)
    if game is None:
        print("no predicted files")
        return 0
    kappa = config.learning.kappa
    profile = bge_fixed_point(game, kappa, config.learning.bge_tol)
    p = profile.p
    print(f"kappa = {kappa:g}, G = {game.g}, phi = {phi}")
    print(f"p: mean {p.mean():.6f}, min {p.min():.6f}, max {p.max():.6f}")
    print(f"expected requests = {p.sum():.3f}")
    print(f"epsilon bound = {epsilon_bound(kappa):.6g}")
    return 0


def cmd_learn(args) -> int:
    config, seed = _load(args)
    scenario, phi, game = prepare(config, seed)
    learning = config.learning
    scheduler = BMRLScheduler(step_schedule_from(config), noise_sigma=learning.noise_sigma,
                              tol=learning.tol, window=learning.window,
                              max_iterations=learning.max_iterations,
                              utility_unit=config.game.utility_unit, trace=learning.trace)
    result = scheduler.schedule(scenario, None, game)
    run = scheduler.last_learning
    print(f"phi = {phi}, requested files = {result.requested_files:.3f}, "
          f"downloaded = {list(result.downloaded)}")
    if run is not None:
        print(f"iterations = {run.iterations}, converged = {run.converged}")
        print("p = " + " ".join(f"{v:.4f}" for v in run.profile.p))
        if args.trace:
            path = Path(args.trace) / f"trace_seed{seed}.jsonl"
            write_trace(run.trace, path)
            print(f"trace written to {path}")
    return 0


def cmd_sweep(args) -> int:
    config, _ = _load(args)
    axis = SweepAxis(args.axis)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    manager = ExperimentManager(config)
    rows = manager.sweep(axis, values)
    out = args.output if args.output else sys.stdout
    write_csv(rows, out, master_seed=config.experiment.seed,
              deterministic=args.deterministic_output)
    if args.trace:
        manager.write_outputs(Path(args.trace))
    return 0


def cmd_compare(args) -> int:
    config, _ = _load(args)
    manager = ExperimentManager(config)
    by_algorithm, summary = manager.compare(ALL_ALGORITHMS)
    print(f"{'algorithm':<10}{'mean files':>12}{'mean Mbit':>12}{'mean slack Mbps':>18}")
    for algorithm in ALL_ALGORITHMS:
        runs = by_algorithm.get(algorithm, [])
        if not runs:
            continue
        files = sum(r.requested_files for r in runs) / len(runs)
        bits = sum(r.requested_bits for r in runs) / len(runs)
        slack = sum(r.slack_bps for r in runs) / len(runs)
        print(f"{algorithm.value:<10}{files:>12.2f}{bits / 1e6:>12.1f}{slack / 1e6:>18.1f}")
    print(f"runs = {summary.runs}")
    print(f"BMRL within one file of OCA: {summary.oca_match_fraction:.0%}")
    print(f"BMRL over CGA: {summary.improvement_over_cga:+.1%}")
    print(f"BMRL over RFA: {summary.improvement_over_rfa:+.1%}")
    if args.trace:
        manager.write_outputs(Path(args.trace))
    return 0


def cmd_verify(args) -> int:
    config, seed = _load(args)
    checks = verify_instance(config, seed)
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"[{status}] {check.name}" + (f": {check.detail}" if check.detail else ""))
    return 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bmmg", description="Backhaul minority game simulator")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("-v", "--verbose", action="store_true", help="same as --log-level INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="config file or preset name")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry (repeatable)")
        p.add_argument("--seed", type=int, default=None)
        p.set_defaults(handler=handler)
        return p

    add("phi", cmd_phi, "print the capacity threshold")
    add("pmne", cmd_pmne, "print p* and the binomial per-SBS strategies")
    bge = add("bge", cmd_bge, "solve the logit equilibrium")
    bge.add_argument("--kappa", type=float, default=None)
    learn = add("learn", cmd_learn, "run BMRL once")
    learn.add_argument("--kappa", type=float, default=None)
    learn.add_argument("--trace", default=None, metavar="DIR")
    sweep = add("sweep", cmd_sweep, "sweep one axis and emit CSV")
    sweep.add_argument("--axis", required=True, choices=[a.value for a in SweepAxis])
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--runs", type=int, default=None)
    sweep.add_argument("--output", default=None)
    sweep.add_argument("--deterministic-output", action="store_true")
    sweep.add_argument("--trace", default=None, metavar="DIR")
    compare = add("compare", cmd_compare, "run all four algorithms and summarize")
    compare.add_argument("--runs", type=int, default=None)
    compare.add_argument("--trace", default=None, metavar="DIR")
    add("verify", cmd_verify, "run the property checks on one instance")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = "INFO" if args.verbose else args.log_level
    logging.basicConfig(level=getattr(logging, level),
                        format='%(asctime)s - %(levelname)s - %(message)s')
    try:
        return args.handler(args)
    except BackhaulError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
