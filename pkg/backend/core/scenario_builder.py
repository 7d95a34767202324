"""
Scenario Builder
Realises a ScenarioConfig into an immutable Scenario for one seed
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from models.config import PredictedSplit, ScenarioConfig
from models.demand import DemandModel, FileSpec
from models.network import (
    MmwParams, ResourceBlockSet, Scenario, Sub6Params, Topology, WiredBackhaul
)

logger = logging.getLogger(__name__)


def _positions(rng: np.random.Generator, given: Optional[Sequence], count: int,
               area: float) -> tuple:
    if given is not None:
        return tuple((float(x), float(y)) for x, y in given)
    return tuple(map(tuple, rng.uniform(0.0, area, size=(count, 2))))


def sub6_path_gain(distances_m: np.ndarray, intercept: float, slope: float) -> np.ndarray:
    """Large-scale gain 10^(-PL/10) with PL = intercept + slope * log10(d / 1 km)"""
    d_km = np.maximum(distances_m, 1.0) / 1000.0
    return 10.0 ** (-(intercept + slope * np.log10(d_km)) / 10.0)


def split_predicted(rng: np.random.Generator, total: int, sbs_count: int,
                    split: PredictedSplit) -> List[int]:
    if split is PredictedSplit.EVEN:
        base, extra = divmod(total, sbs_count)
        return [base + (1 if n < extra else 0) for n in range(sbs_count)]
    return [int(c) for c in rng.multinomial(total, [1.0 / sbs_count] * sbs_count)]


def _draw_files(rng: np.random.Generator, count: int, config: ScenarioConfig) -> List[FileSpec]:
    demand = config.demand
    sizes = rng.uniform(demand.size_min, demand.size_max, size=count)
    deadlines = rng.uniform(demand.deadline_min, demand.deadline_max, size=count)
    return [FileSpec.from_size(float(L), float(x)) for L, x in zip(sizes, deadlines)]


def build_demand(rng: np.random.Generator, config: ScenarioConfig) -> DemandModel:
    """Current files per SBS, then predicted files sorted by ascending deadline"""
    n_sbs = config.topology.sbs_count
    current = tuple(tuple(_draw_files(rng, config.demand.current_per_sbs, config))
                    for _ in range(n_sbs))
    counts = split_predicted(rng, config.demand.predicted_total, n_sbs,
                             config.demand.predicted_split)
    predicted = []
    for count in counts:
        files = _draw_files(rng, count, config)
        predicted.append(tuple(sorted(files, key=lambda f: f.deadline_s)))
    return DemandModel(current, tuple(predicted))


def build_scenario(config: ScenarioConfig, seed: int = 0) -> Scenario:
    """Positions, fit deviations, sub-6 fading and demand, all drawn from one seed"""
    rng = np.random.default_rng(seed)
    topo_cfg = config.topology
    topology = Topology(
        mbs_positions=_positions(rng, topo_cfg.mbs_positions, topo_cfg.mbs_count, topo_cfg.area_side),
        sbs_positions=_positions(rng, topo_cfg.sbs_positions, topo_cfg.sbs_count, topo_cfg.area_side),
        area_side=topo_cfg.area_side,
    )
    m, n = topology.mbs_count, topology.sbs_count

    mmw_cfg = config.channel.mmw
    mmw = MmwParams(mmw_cfg.alpha, mmw_cfg.beta, mmw_cfg.zeta2, mmw_cfg.noise_n1)
    deviations = rng.normal(0.0, np.sqrt(mmw_cfg.zeta2), size=(m, n))

    blocks_cfg = config.blocks
    sub6_cfg = config.channel.sub6
    path_gain = sub6_path_gain(topology.distances, sub6_cfg.path_loss_intercept,
                               sub6_cfg.path_loss_slope)
    fading = rng.exponential(1.0, size=(m, blocks_cfg.sub6_count, n))
    sub6 = Sub6Params(sub6_cfg.noise_n2, path_gain[:, None, :] * fading)

    k_mmw = blocks_cfg.mmw_count
    block_count = blocks_cfg.block_count
    tx_power = np.empty((m, block_count, n))
    # mmW power in mW so that 10 log10(P) reads in dBm
    tx_power[:, :k_mmw, :] = 10.0 ** (blocks_cfg.mmw_power_dbm / 10.0)
    tx_power[:, k_mmw:, :] = blocks_cfg.sub6_power
    blocks = ResourceBlockSet(
        mmw_blocks=tuple(range(k_mmw)),
        sub6_blocks=tuple(range(k_mmw, block_count)),
        bandwidth=tuple([blocks_cfg.mmw_bandwidth] * k_mmw
                        + [blocks_cfg.sub6_bandwidth] * blocks_cfg.sub6_count),
        tx_power=tx_power,
    )

    wired_cfg = config.backhaul.wired
    if wired_cfg.per_mbs is not None:
        wired = WiredBackhaul(tuple(wired_cfg.per_mbs), wired_cfg.c_max)
    else:
        wired = WiredBackhaul.evenly_split(wired_cfg.c_max, m)

    demand = build_demand(rng, config)
    scenario = Scenario(topology, mmw, sub6, blocks, wired, demand, deviations, seed)
    logger.info("Scenario built: seed=%d, %d MBS, %d SBS, %d blocks, %d predicted files",
                seed, m, n, block_count, demand.total_predicted)
    return scenario
