"""
Backhaul Allocator
Greedy resource-block assignment, wired split and the capacity threshold phi
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ModelDomainError
from core.netmodel import link_rate, total_rates, wired_shares
from models.demand import BackhaulAssignment, DemandModel
from models.network import BlockBand, Scenario

logger = logging.getLogger(__name__)

# Relative slack when comparing an allocated rate to a demanded rate
RATE_TOLERANCE = 1e-9


def required_rates(demands: DemandModel, s: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    R_n = sum of L_f/x_f over current files,
    D_n(s_n) = sum of L_f/x_f over the first s_n predicted files
    """
    if len(s) != demands.sbs_count:
        raise ModelDomainError(f"expected {demands.sbs_count} request counts, got {len(s)}")
    current = np.zeros(demands.sbs_count)
    predicted = np.zeros(demands.sbs_count)
    for n, s_n in enumerate(s):
        if not 0 <= s_n <= len(demands.predicted[n]):
            raise ModelDomainError(
                f"s_{n}={s_n} outside [0, {len(demands.predicted[n])}]"
            )
        current[n] = sum(f.required_rate for f in demands.current[n])
        predicted[n] = sum(f.required_rate for f in demands.predicted[n][:s_n])
    return current, predicted


def global_priority_order(demands: DemandModel) -> List[Tuple[int, int]]:
    """Round-robin interleave of the per-SBS priority lists as (SBS, rank)"""
    order = []
    for rank in range(max(demands.file_counts, default=0)):
        for n, count in enumerate(demands.file_counts):
            if rank < count:
                order.append((n, rank))
    return order


def priority_shares(demands: DemandModel, f: int) -> Tuple[int, ...]:
    """Per-SBS request counts when the first f files of the global order are requested"""
    if not 0 <= f <= demands.total_predicted:
        raise ModelDomainError(f"f={f} outside [0, {demands.total_predicted}]")
    counts = [0] * demands.sbs_count
    for n, _ in global_priority_order(demands)[:f]:
        counts[n] += 1
    return tuple(counts)


def _candidate_units(scenario: Scenario, eta: np.ndarray) -> List[Tuple[int, int]]:
    """(MBS, block) pairs still free under the block-family reuse rules"""
    blocks = scenario.blocks
    units = []
    for k in blocks.all_blocks:
        in_use = eta[k].any(axis=1)
        if blocks.band(k) is BlockBand.MMW and in_use.any():
            # directional mmW blocks carry a single MBS
            continue
        for m in range(scenario.mbs_count):
            if not in_use[m]:
                units.append((m, k))
    return units


def allocate(scenario: Scenario, s: Sequence[int]) -> BackhaulAssignment:
    """
    Deterministic greedy assignment. The SBS with the largest unmet rate
    (ties: lowest id) takes the free (MBS, block) unit with the highest rate
    for it, until every SBS holds the fairness floor of blocks and either all
    demand is met or units run out. Wired capacity is split by load share.
    """
    current, predicted = required_rates(scenario.demand, s)
    demand = current + predicted
    n_sbs, n_mbs = scenario.sbs_count, scenario.mbs_count
    block_count = scenario.blocks.block_count

    wired = np.outer(np.asarray(scenario.wired.per_mbs_capacity),
                     wired_shares(scenario.demand, s))
    eta = np.zeros((block_count, n_mbs, n_sbs), dtype=np.int8)
    allocated = wired.sum(axis=0)
    held = np.zeros(n_sbs, dtype=int)
    floor = block_count // n_sbs

    while True:
        units = _candidate_units(scenario, eta)
        if not units:
            break
        unmet = demand - allocated
        below_floor = held < floor
        if below_floor.any():
            eligible = np.flatnonzero(below_floor)
        else:
            eligible = np.flatnonzero(unmet > RATE_TOLERANCE * np.maximum(demand, 1.0))
            if eligible.size == 0:
                break
        # argmax keeps the lowest id among ties
        n = int(eligible[np.argmax(unmet[eligible])])

        current_assignment = BackhaulAssignment(eta, wired)
        best_unit, best_rate = None, -1.0
        for m, k in units:
            interferers = current_assignment.transmitting_mbs(k) + [m]
            rate = link_rate(m, k, n, current_assignment, scenario, interferers)
            if rate > best_rate:
                best_unit, best_rate = (m, k), rate
        m, k = best_unit
        eta[k, m, n] = 1
        held[n] += 1
        # a shared sub-6 block also lowers the rates of SBSs already served on it
        allocated = total_rates(BackhaulAssignment(eta, wired), scenario)

    return BackhaulAssignment(eta, wired)


def is_feasible(scenario: Scenario, s: Sequence[int]) -> bool:
    """True when every SBS's total rate covers R_n + D_n(s_n)"""
    current, predicted = required_rates(scenario.demand, s)
    demand = current + predicted
    rates = total_rates(allocate(scenario, s), scenario)
    return bool(np.all(rates >= demand * (1.0 - RATE_TOLERANCE)))


def compute_phi(scenario: Scenario, limit: Optional[int] = None) -> int:
    """
    Largest total predicted-file count f, taken in global priority order,
    for which every SBS still meets its demand. Linear search from f = 0;
    `limit` caps the search (used when capacity only shrinks).
    """
    total = scenario.demand.total_predicted
    if limit is not None:
        total = min(total, limit)
    for f in range(total + 1):
        if not is_feasible(scenario, priority_shares(scenario.demand, f)):
            logger.debug("phi search: f=%d infeasible", f)
            return max(f - 1, 0)
    return total
