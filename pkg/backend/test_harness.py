"""
Tests for seeded runs, sweeps, the BMRL comparison, reporting and
instance verification
"""
import io

import pytest

from core.config_loader import apply_overrides
from core.errors import ComparisonError, ConfigError
from core.experiment_manager import (
    ALL_ALGORITHMS, ExperimentManager, SweepAxis, compare_report, derive_run_seeds,
    group_by_algorithm, run_scenario, sweep_overrides, thread_cap
)
from core.reporting import CSV_COLUMNS, read_csv, read_lines, write_csv
from core.verification import verify_instance
from models.metrics import Algorithm, RunMetrics


@pytest.fixture
def small_toy(toy_config):
    return apply_overrides(toy_config, {"experiment.runs": 2})


def fake_run(algorithm, seed, files, bits, axis_value=1.0):
    return RunMetrics(algorithm=algorithm, seed=seed, phi=3, requested_files=files,
                      requested_bits=bits, slack_bps=0.0, axis_value=axis_value)


# ---------------------------------------------------------------- seeds and single runs

def test_derive_run_seeds():
    seeds = derive_run_seeds(0, 5)
    assert len(set(seeds)) == 5
    assert seeds == derive_run_seeds(0, 5)
    assert derive_run_seeds(0, 3) == seeds[:3]
    assert derive_run_seeds(1, 5) != seeds


def test_run_scenario_is_deterministic(toy_config):
    first = run_scenario(toy_config, Algorithm.BMRL, 11)
    second = run_scenario(toy_config, Algorithm.BMRL, 11)
    assert first == second
    assert first.iterations is not None
    assert len(first.final_p) == 6


def test_run_scenario_oca_on_toy(toy_config):
    metrics = run_scenario(toy_config, Algorithm.OCA, 0)
    assert metrics.phi == 3
    assert metrics.requested_files == 3.0
    assert metrics.downloaded == (1, 1, 1)
    # u(c, phi) is zero on the toy table
    assert metrics.utility == pytest.approx(0.0, abs=1e-12)
    assert metrics.iterations is None


# ---------------------------------------------------------------- threads and overrides

def test_thread_cap(monkeypatch):
    monkeypatch.setenv("BMMG_THREADS", "3")
    assert thread_cap() == 3
    monkeypatch.delenv("BMMG_THREADS")
    assert thread_cap() >= 1
    for bad in ("abc", "0"):
        monkeypatch.setenv("BMMG_THREADS", bad)
        with pytest.raises(ConfigError):
            thread_cap()


def test_sweep_overrides():
    assert sweep_overrides(SweepAxis.FILE_COUNT, 4.0) == {"demand.predicted_total": 4}
    assert sweep_overrides(SweepAxis.CAPACITY, 2e9) == {"backhaul.wired.c_max": 2e9,
                                                       "backhaul.wired.per_mbs": None}
    assert sweep_overrides(SweepAxis.KAPPA, 0.5) == {"learning.kappa": 0.5}
    with pytest.raises(ConfigError):
        sweep_overrides(SweepAxis.FILE_COUNT, 2.5)


# ---------------------------------------------------------------- sweeps

def test_sweep_rows(small_toy):
    rows = ExperimentManager(small_toy, max_workers=2).sweep(SweepAxis.FILE_COUNT, [6, 3])
    assert len(rows) == 8
    assert [r.axis_value for r in rows] == [6.0] * 4 + [3.0] * 4
    assert [r.algorithm for r in rows[:4]] == list(ALL_ALGORITHMS)

    oca = {r.axis_value: r for r in rows if r.algorithm is Algorithm.OCA}
    # six files: phi = 3; three files: all of them fit
    assert oca[6.0].mean_requested_bits == pytest.approx(3e6)
    assert oca[3.0].mean_requested_bits == pytest.approx(3e6)
    assert oca[6.0].std_requested_bits == 0.0
    assert oca[6.0].oca_match_fraction == 1.0
    assert oca[6.0].iterations_mean is None

    bmrl = [r for r in rows if r.algorithm is Algorithm.BMRL]
    assert all(r.iterations_mean is not None and r.runs == 2 for r in bmrl)


def test_sweep_independent_of_thread_count(small_toy):
    single = ExperimentManager(small_toy, max_workers=1).sweep(SweepAxis.KAPPA, [0.5, 2.0])
    pooled = ExperimentManager(small_toy, max_workers=4).sweep(SweepAxis.KAPPA, [0.5, 2.0])
    assert single == pooled


def test_deterministic_csv_is_byte_identical(small_toy, tmp_path):
    outputs = []
    for _ in range(2):
        rows = ExperimentManager(small_toy).sweep(SweepAxis.CAPACITY, [6e6, 9e6])
        buffer = io.StringIO()
        write_csv(rows, buffer, master_seed=0, deterministic=True)
        outputs.append(buffer.getvalue())
    assert outputs[0] == outputs[1]
    assert outputs[0].startswith("# master_seed=0\n")

    path = tmp_path / "sweep.csv"
    path.write_text(outputs[0])
    frame = read_csv(path)
    assert list(frame.columns) == CSV_COLUMNS
    assert len(frame) == 8


def test_csv_timestamp_header_when_not_deterministic(small_toy):
    rows = ExperimentManager(small_toy).sweep(SweepAxis.FILE_COUNT, [6], [Algorithm.OCA])
    buffer = io.StringIO()
    write_csv(rows, buffer)
    assert buffer.getvalue().startswith("# generated ")


# ---------------------------------------------------------------- comparison

def test_compare_report_match_fraction():
    runs = [
        fake_run(Algorithm.BMRL, 1, 3.0, 4.0), fake_run(Algorithm.BMRL, 2, 5.0, 6.0),
        fake_run(Algorithm.OCA, 1, 3.0, 3.0), fake_run(Algorithm.OCA, 2, 3.0, 3.0),
        fake_run(Algorithm.CGA, 1, 2.0, 2.0), fake_run(Algorithm.CGA, 2, 3.0, 3.0),
        fake_run(Algorithm.RFA, 1, 5.0, 5.0), fake_run(Algorithm.RFA, 2, 5.0, 5.0),
    ]
    summary = compare_report(group_by_algorithm(runs))
    assert summary.runs == 2
    assert summary.oca_match_fraction == 0.5
    # mean bits 5 against 2.5 and 5
    assert summary.improvement_over_cga == pytest.approx(1.0)
    assert summary.improvement_over_rfa == 0.0
    assert summary.mean_requested_bits["oca"] == 3.0


def test_compare_report_needs_oca():
    runs = [fake_run(Algorithm.BMRL, 1, 3.0, 3.0)]
    with pytest.raises(ComparisonError):
        compare_report(group_by_algorithm(runs))


def test_compare_report_rejects_misaligned_seeds():
    runs = [fake_run(Algorithm.BMRL, 1, 3.0, 3.0), fake_run(Algorithm.OCA, 2, 3.0, 3.0)]
    with pytest.raises(ComparisonError):
        compare_report(group_by_algorithm(runs))


def test_compare_on_toy(small_toy):
    by_algorithm, summary = ExperimentManager(small_toy).compare()
    assert set(by_algorithm) == set(ALL_ALGORITHMS)
    assert all(len(runs) == 2 for runs in by_algorithm.values())
    assert summary.runs == 2
    assert 0.0 <= summary.oca_match_fraction <= 1.0


def test_write_outputs(small_toy, tmp_path):
    config = apply_overrides(small_toy, {"learning.trace": True})
    manager = ExperimentManager(config)
    manager.compare()
    manager.write_outputs(tmp_path)

    runs = read_lines(tmp_path / "runs.jsonl")
    assert len(runs) == 8
    assert set(runs["algorithm"]) == {a.value for a in ALL_ALGORITHMS}

    traces = sorted(tmp_path.glob("trace_seed*.jsonl"))
    assert len(traces) == 2
    trace = read_lines(traces[0])
    assert {"t", "player", "action", "observed_u", "p"} <= set(trace.columns)
    assert set(trace["player"]) == set(range(6))


# ---------------------------------------------------------------- verification

def test_verify_toy_passes(toy_config):
    checks = verify_instance(toy_config)
    names = [c.name for c in checks]
    assert "phi_feasible" in names and "logit_equilibrium" in names
    assert all(c.passed for c in checks), [c.to_dict() for c in checks if not c.passed]


def test_verify_without_predicted_files(toy_config):
    config = apply_overrides(toy_config, {"demand.predicted_total": 0})
    checks = verify_instance(config)
    assert all(c.passed for c in checks)
    assert checks[-1].name == "game"


def test_verify_flags_equal_timescales(toy_config):
    config = apply_overrides(toy_config, {"learning.lambda_exponent": 1.0})
    checks = {c.name: c for c in verify_instance(config)}
    assert not checks["step_schedule_timescales"].passed
    assert "lambda_alpha_ratio_vanishes" in checks["step_schedule_timescales"].detail
