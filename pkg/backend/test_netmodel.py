"""
Tests for the physical-layer model and the backhaul allocator
"""
import math

import numpy as np
import pytest

from conftest import MBIT, unit_files
from core.allocation import (
    allocate, compute_phi, global_priority_order, is_feasible, priority_shares, required_rates
)
from core.config_loader import load_preset
from core.errors import DegenerateDemandError, ModelDomainError
from core.netmodel import (
    mmw_path_loss, mmw_snr, sub6_sinr, total_rate, total_rates, wired_share, wired_shares
)
from core.scenario_builder import build_scenario
from models.demand import BackhaulAssignment, DemandModel, FileSpec
from models.network import MmwParams


def empty_assignment(scenario):
    k = scenario.blocks.block_count
    return BackhaulAssignment(np.zeros((k, scenario.mbs_count, scenario.sbs_count), dtype=np.int8),
                              np.zeros((scenario.mbs_count, scenario.sbs_count)))


# ---------------------------------------------------------------- mmW model

def test_mmw_path_loss_examples():
    """L = beta + alpha * 10 log10(d) + X"""
    params = MmwParams(alpha=2.0, beta=70.0, zeta2=0.0, noise_n1=1.0)
    assert mmw_path_loss(1.0, params) == pytest.approx(70.0)
    assert mmw_path_loss(10.0, params) == pytest.approx(90.0)

    fitted = MmwParams(alpha=3.3, beta=61.4, zeta2=0.0, noise_n1=1.0)
    assert mmw_path_loss(100.0, fitted) == pytest.approx(127.4)
    assert mmw_path_loss(100.0, fitted, deviation=-2.5) == pytest.approx(124.9)


def test_mmw_path_loss_below_one_meter():
    params = MmwParams(alpha=2.0, beta=70.0, zeta2=0.0, noise_n1=1.0)
    with pytest.raises(ModelDomainError):
        mmw_path_loss(0.5, params)


def test_mmw_path_loss_deviation_mean():
    """Gaussian fit deviations average out to the deterministic loss"""
    params = MmwParams(alpha=2.0, beta=61.4, zeta2=5.8 ** 2, noise_n1=20.0)
    rng = np.random.default_rng(7)
    samples = 20_000
    deviations = rng.normal(0.0, math.sqrt(params.zeta2), samples)
    losses = np.array([mmw_path_loss(50.0, params, x) for x in deviations])
    assert abs(losses.mean() - mmw_path_loss(50.0, params)) < 4 * 5.8 / math.sqrt(samples)


def test_mmw_snr_examples():
    assert mmw_snr(1e9, 90.0, 1.0) == pytest.approx(0.0)
    assert mmw_snr(1e10, 90.0, 2.0) == pytest.approx(5.0)
    with pytest.raises(ModelDomainError):
        mmw_snr(0.0, 90.0, 1.0)


def test_mmw_snr_matches_scalar_recomputation():
    """Rates of a seeded scenario rebuilt by hand from positions and deviations"""
    scenario = build_scenario(load_preset("default"), seed=4)
    m, n = 1, 3
    d = math.dist(scenario.topology.mbs_positions[m], scenario.topology.sbs_positions[n])
    loss = scenario.mmw.beta + scenario.mmw.alpha * 10 * math.log10(d) + scenario.deviations[m, n]
    p_mw = scenario.blocks.tx_power[m, 0, n]
    expected = (10 * math.log10(p_mw) - loss) / scenario.mmw.noise_n1
    assert scenario.mmw_losses[m, n] == pytest.approx(loss)
    assert mmw_snr(p_mw, scenario.mmw_losses[m, n], scenario.mmw.noise_n1) == pytest.approx(expected)


# ---------------------------------------------------------------- sub-6 model

def test_sub6_sinr_without_interferers(manual_scenario):
    scenario = manual_scenario(sub6_blocks=1, sub6_power=4.0, noise_n2=2.0)
    assert sub6_sinr(0, 0, 0, empty_assignment(scenario), scenario) == pytest.approx(2.0)


def test_sub6_sinr_symmetric_interferer(manual_scenario):
    """Only MBSs actively serving on the block interfere"""
    scenario = manual_scenario(mbs=2, sub6_blocks=1)
    quiet = empty_assignment(scenario)
    assert sub6_sinr(0, 0, 0, quiet, scenario) == pytest.approx(1.0)

    eta = np.zeros((1, 2, 1), dtype=np.int8)
    eta[0, 1, 0] = 1
    busy = BackhaulAssignment(eta, np.zeros((2, 1)))
    assert sub6_sinr(0, 0, 0, busy, scenario) == pytest.approx(0.5)


def test_sub6_sinr_interferer_set_from_eta(manual_scenario):
    """Brute-force recomputation over a 3-MBS block with random gains"""
    rng = np.random.default_rng(3)
    gains = rng.exponential(1.0, size=(3, 2, 2))
    scenario = manual_scenario(mbs=3, sbs=2, sub6_blocks=2, gains=gains, noise_n2=0.1)
    eta = np.zeros((2, 3, 2), dtype=np.int8)
    eta[0, 1, 1] = 1
    eta[0, 2, 0] = 1
    eta[1, 0, 1] = 1
    assignment = BackhaulAssignment(eta, np.zeros((3, 2)))

    for k in range(2):
        for m in range(3):
            for n in range(2):
                active = [i for i in range(3) if eta[k, i, :].any() and i != m]
                interference = sum(gains[i, k, n] for i in active)
                expected = gains[m, k, n] / (0.1 + interference)
                assert sub6_sinr(m, k, n, assignment, scenario) == pytest.approx(expected)


def test_sub6_sinr_decreases_with_more_interferers(manual_scenario):
    scenario = manual_scenario(mbs=3, sub6_blocks=1)
    assignment = empty_assignment(scenario)
    alone = sub6_sinr(0, 0, 0, assignment, scenario, interferers=[])
    one = sub6_sinr(0, 0, 0, assignment, scenario, interferers=[1])
    two = sub6_sinr(0, 0, 0, assignment, scenario, interferers=[1, 2])
    assert alone > one > two


def test_sub6_sinr_rejects_mmw_block(manual_scenario):
    scenario = manual_scenario(mmw_blocks=1, sub6_blocks=1)
    with pytest.raises(ModelDomainError):
        sub6_sinr(0, 0, 0, empty_assignment(scenario), scenario)


# ---------------------------------------------------------------- wired share and total rate

def test_wired_share_examples():
    single = DemandModel((unit_files([2.0]),), ((),))
    assert wired_share(0, single, [0]) == pytest.approx(1.0)

    equal = DemandModel(tuple(unit_files([1.0]) for _ in range(4)), tuple(() for _ in range(4)))
    assert np.allclose(wired_shares(equal, [0] * 4), 0.25)

    uneven = DemandModel((unit_files([3.0]), unit_files([1.0])), ((), ()))
    assert np.allclose(wired_shares(uneven, [0, 0]), [0.75, 0.25])


def test_wired_share_counts_requested_files():
    demand = DemandModel((unit_files([1.0]), unit_files([1.0])), (unit_files([2.0]), ()))
    assert np.allclose(wired_shares(demand, [1, 0]), [0.75, 0.25])
    assert wired_shares(demand, [1, 0]).sum() == pytest.approx(1.0, abs=1e-12)


def test_wired_share_degenerate():
    demand = DemandModel(((), ()), ((), ()))
    with pytest.raises(DegenerateDemandError):
        wired_shares(demand, [0, 0])


def test_total_rate_examples(manual_scenario):
    scenario = manual_scenario(sub6_blocks=1)
    assert total_rate(0, empty_assignment(scenario), scenario) == 0.0

    eta = np.zeros((1, 1, 1), dtype=np.int8)
    eta[0, 0, 0] = 1
    served = BackhaulAssignment(eta, np.zeros((1, 1)))
    # one 1 MHz block at gamma = 1
    assert total_rate(0, served, scenario) == pytest.approx(1e6)

    wired = BackhaulAssignment(eta, np.full((1, 1), 2.5e6))
    assert total_rate(0, wired, scenario) == pytest.approx(3.5e6)


def test_total_rate_term_by_term():
    """Total rate recomputed term by term from eta, gamma and wired shares"""
    scenario = build_scenario(load_preset("default"), seed=11)
    s = priority_shares(scenario.demand, 20)
    assignment = allocate(scenario, s)

    for n in range(scenario.sbs_count):
        expected = float(assignment.wired[:, n].sum())
        for k, m, held in zip(*np.nonzero(assignment.eta[:, :, :])):
            if held != n:
                continue
            if k in scenario.blocks.mmw_blocks:
                gamma = 10 ** (mmw_snr(scenario.blocks.tx_power[m, k, n],
                                       scenario.mmw_losses[m, n], scenario.mmw.noise_n1) / 10)
            else:
                gamma = sub6_sinr(m, k, n, assignment, scenario)
            expected += scenario.blocks.bandwidth[k] * math.log2(1 + gamma)
        assert total_rate(n, assignment, scenario) == pytest.approx(expected)


# ---------------------------------------------------------------- allocation

def test_required_rates_examples():
    demand = DemandModel(
        (unit_files([]) + (FileSpec.from_size(8 * MBIT, 2.0),),),
        (unit_files([1.0, 2.0, 3.0]),),
    )
    current, predicted = required_rates(demand, [2])
    assert current[0] == pytest.approx(4 * MBIT)
    assert predicted[0] == pytest.approx(3 * MBIT)

    _, none = required_rates(demand, [0])
    assert none[0] == 0.0

    with pytest.raises(ModelDomainError):
        required_rates(demand, [4])


def test_global_priority_order_round_robin():
    demand = DemandModel(
        (unit_files([1.0]), unit_files([1.0]), unit_files([1.0])),
        (unit_files([1, 1, 1]), unit_files([1]), unit_files([1, 1])),
    )
    assert global_priority_order(demand) == [(0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (0, 2)]
    assert priority_shares(demand, 4) == (2, 1, 1)
    assert priority_shares(demand, 6) == (3, 1, 2)
    with pytest.raises(ModelDomainError):
        priority_shares(demand, 7)


def test_allocate_single_sbs_takes_every_block(manual_scenario):
    scenario = manual_scenario(sub6_blocks=3, current=(unit_files([100.0]),))
    assignment = allocate(scenario, [0])
    assert assignment.eta[:, 0, 0].sum() == 3


def test_allocate_fairness_floor_with_equal_demands(manual_scenario):
    scenario = manual_scenario(sbs=2, sub6_blocks=2,
                               current=(unit_files([5.0]), unit_files([5.0])))
    assignment = allocate(scenario, [0, 0])
    assert len(assignment.blocks_held(0)) == 1
    assert len(assignment.blocks_held(1)) == 1


def test_allocate_accounts_for_interference_on_shared_blocks(manual_scenario):
    """
    SBS 0 is satisfied on block 0 until MBS 1 reuses that block for SBS 1.
    The SINR then drops to 15/16 and SBS 0 must take block 2 as well.
    """
    gains = np.zeros((2, 3, 2))
    gains[0, 0, 0] = gains[1, 0, 0] = gains[0, 2, 0] = 15.0
    gains[1, 0, 1] = 15.0
    gains[0, 1, 1] = 7.0
    scenario = manual_scenario(mbs=2, sbs=2, sub6_blocks=3, gains=gains,
                               current=(unit_files([4.0]), unit_files([3.5])))
    assignment = allocate(scenario, [0, 0])

    assert assignment.eta[0, 0, 0] == 1 and assignment.eta[0, 1, 1] == 1
    assert assignment.eta[2, 0, 0] == 1
    rates = total_rates(assignment, scenario)
    assert rates[0] == pytest.approx(1e6 * (math.log2(1 + 15 / 16) + 4.0))
    assert rates[1] == pytest.approx(4e6)
    assert is_feasible(scenario, [0, 0])


def test_allocate_is_deterministic():
    scenario = build_scenario(load_preset("default"), seed=5)
    s = priority_shares(scenario.demand, 30)
    assert allocate(scenario, s).same_as(allocate(scenario, s))


def test_allocate_maximizes_min_satisfaction_on_toy(manual_scenario):
    """Two SBSs, two blocks of different quality: checked against every assignment"""
    gains = np.array([[[4.0, 1.0], [1.0, 4.0]]])
    scenario = manual_scenario(sbs=2, sub6_blocks=2, gains=gains,
                               current=(unit_files([2.0]), unit_files([2.0])))
    demand = np.array([2e6, 2e6])

    best = -math.inf
    for first in range(2):
        eta = np.zeros((2, 1, 2), dtype=np.int8)
        eta[0, 0, first] = 1
        eta[1, 0, 1 - first] = 1
        candidate = BackhaulAssignment(eta, np.zeros((1, 2)))
        best = max(best, float(np.min(total_rates(candidate, scenario) / demand)))

    chosen = allocate(scenario, [0, 0])
    assert float(np.min(total_rates(chosen, scenario) / demand)) == pytest.approx(best)


def test_compute_phi_toy(make_toy):
    """Slack for exactly three unit-rate files"""
    scenario = make_toy(sbs=3, files=2, phi=3)
    phi = compute_phi(scenario)
    assert phi == 3
    assert is_feasible(scenario, priority_shares(scenario.demand, phi))
    assert not is_feasible(scenario, priority_shares(scenario.demand, phi + 1))


def test_compute_phi_all_files_fit(make_toy):
    scenario = make_toy(sbs=2, files=2, phi=10)
    assert compute_phi(scenario) == 4


def test_compute_phi_limit(make_toy):
    assert compute_phi(make_toy(phi=3), limit=2) == 2


def test_compute_phi_case2_backhaul_too_small():
    """50 Mbps cannot even carry the current requests"""
    scenario = build_scenario(load_preset("case2"), seed=2)
    assert compute_phi(scenario) == 0


@pytest.mark.slow
def test_compute_phi_case3_everything_fits():
    scenario = build_scenario(load_preset("case3"), seed=3)
    assert compute_phi(scenario) == 150


@pytest.mark.slow
def test_compute_phi_case1_is_interior():
    scenario = build_scenario(load_preset("case1"), seed=1)
    phi = compute_phi(scenario)
    assert 0 < phi < 150
    assert is_feasible(scenario, priority_shares(scenario.demand, phi))
    assert not is_feasible(scenario, priority_shares(scenario.demand, phi + 1))
