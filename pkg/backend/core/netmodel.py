"""
Physical-layer backhaul model
Path loss, mmW SNR, sub-6 GHz SINR, wired sharing and per-SBS achievable rate
"""

import math
from typing import Optional, Sequence

import numpy as np

from core.errors import DegenerateDemandError, ModelDomainError
from models.demand import BackhaulAssignment, DemandModel
from models.network import BlockBand, MmwParams, Scenario


def mmw_path_loss(distance_m: float, params: MmwParams, deviation: float = 0.0) -> float:
    """L = beta + alpha * 10 log10(delta) + X, in dB"""
    if distance_m < 1.0:
        raise ModelDomainError(f"mmW path loss is fitted from 1 m, got {distance_m} m")
    return params.beta + params.alpha * 10.0 * math.log10(distance_m) + deviation


def mmw_snr(power: float, path_loss_db: float, noise_n1: float) -> float:
    """
    mmW SNR kept in the dB domain: (10 log10(P) - L) / N1.
    P uses the tx_power convention of mmW blocks (milliwatts).
    """
    if power <= 0:
        raise ModelDomainError("transmit power must be > 0")
    if noise_n1 <= 0:
        raise ModelDomainError("noise_n1 must be > 0")
    return (10.0 * math.log10(power) - path_loss_db) / noise_n1


def snr_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def sub6_sinr(m: int, k2: int, n: int, assignment: BackhaulAssignment,
              scenario: Scenario, interferers: Optional[Sequence[int]] = None) -> float:
    """
    SINR of MBS m at SBS n on sub-6 block k2. Only MBSs actively serving
    some SBS on k2 interfere; pass `interferers` to override that set.
    """
    blocks = scenario.blocks
    if blocks.band(k2) is not BlockBand.SUB6:
        raise ModelDomainError(f"block {k2} is not a sub-6 GHz block")
    gains = scenario.sub6.channel_gains[:, blocks.sub6_index(k2), n]
    power = blocks.tx_power[:, k2, n]
    if interferers is None:
        interferers = assignment.transmitting_mbs(k2)
    interference = sum(power[i] * gains[i] for i in interferers if i != m)
    return power[m] * gains[m] / (scenario.sub6.noise_n2 + interference)


def link_gamma(m: int, k: int, n: int, assignment: BackhaulAssignment,
               scenario: Scenario, interferers: Optional[Sequence[int]] = None) -> float:
    """Linear SNR/SINR of link (m, k, n) for either block family"""
    if scenario.blocks.band(k) is BlockBand.MMW:
        loss = scenario.mmw_losses[m, n]
        return snr_to_linear(mmw_snr(scenario.blocks.tx_power[m, k, n], loss,
                                     scenario.mmw.noise_n1))
    return sub6_sinr(m, k, n, assignment, scenario, interferers)


def link_rate(m: int, k: int, n: int, assignment: BackhaulAssignment,
              scenario: Scenario, interferers: Optional[Sequence[int]] = None) -> float:
    """omega_k * log2(1 + gamma) in bits/s"""
    gamma = link_gamma(m, k, n, assignment, scenario, interferers)
    return scenario.blocks.bandwidth[k] * math.log2(1.0 + gamma)


def sbs_loads(demands: DemandModel, s: Sequence[int]) -> np.ndarray:
    """Traffic load of each SBS: sum of q_f over requested files plus R_n"""
    loads = np.zeros(demands.sbs_count)
    for n in range(demands.sbs_count):
        requested = demands.predicted[n][:s[n]]
        current_rate = sum(f.required_rate for f in demands.current[n])
        loads[n] = sum(f.serving_rate for f in requested) + current_rate
    return loads


def wired_shares(demands: DemandModel, s: Sequence[int]) -> np.ndarray:
    """sigma_n for every SBS; sums to 1"""
    loads = sbs_loads(demands, s)
    total = loads.sum()
    if total <= 0:
        raise DegenerateDemandError("every SBS has zero traffic load")
    return loads / total


def wired_share(n: int, demands: DemandModel, s: Sequence[int]) -> float:
    return float(wired_shares(demands, s)[n])


def total_rate(n: int, assignment: BackhaulAssignment, scenario: Scenario) -> float:
    """Wired share plus Shannon rate of every assigned block"""
    rate = float(assignment.wired[:, n].sum())
    for m, k in assignment.blocks_held(n):
        rate += link_rate(m, k, n, assignment, scenario)
    return rate


def total_rates(assignment: BackhaulAssignment, scenario: Scenario) -> np.ndarray:
    return np.array([total_rate(n, assignment, scenario) for n in range(scenario.sbs_count)])
