"""
Shared fixtures: the wired-only toy scenario and hand-built channel scenarios
"""

from typing import Optional, Sequence

import numpy as np
import pytest

from core.config_loader import apply_overrides, load_preset
from core.scenario_builder import build_scenario
from models.demand import DemandModel, FileSpec
from models.network import (
    MmwParams, ResourceBlockSet, Scenario, Sub6Params, Topology, WiredBackhaul
)

MBIT = 1e6


@pytest.fixture
def toy_config():
    """One MBS, three SBSs with two 1 Mbit/1 s predicted files each, phi = 3"""
    return load_preset("toy")


@pytest.fixture
def make_toy(toy_config):
    """
    Wired-only toy with `sbs` SBSs holding `files` unit-rate predicted files
    each; the wired capacity leaves room for exactly `phi` of them
    """
    def _make(sbs: int = 3, files: int = 2, phi: int = 3, seed: int = 0):
        config = apply_overrides(toy_config, {
            "topology.sbs_count": sbs,
            "topology.sbs_positions": None,
            "demand.predicted_total": sbs * files,
            "backhaul.wired.c_max": (sbs + phi) * MBIT,
        })
        return build_scenario(config, seed)
    return _make


def unit_files(rates_mbps: Sequence[float]):
    """Files due in 1 s whose required rate is the given number of Mbit/s"""
    return tuple(FileSpec.from_size(r * MBIT, 1.0) for r in rates_mbps)


@pytest.fixture
def manual_scenario():
    """
    Scenario built directly from model objects. `gains` and `sub6_power`
    are (MBS, sub-6 block, SBS) arrays; mmW blocks get `mmw_power_mw`.
    """
    def _make(mbs: int = 1, sbs: int = 1, mmw_blocks: int = 0, sub6_blocks: int = 0,
              gains: Optional[np.ndarray] = None, sub6_power: float = 1.0,
              mmw_power_mw: float = 1000.0, noise_n2: float = 1.0,
              bandwidth: float = 1e6, wired: float = 0.0,
              current=None, predicted=None):
        side = 100.0
        topology = Topology(
            mbs_positions=tuple((10.0 + 10.0 * m, 10.0) for m in range(mbs)),
            sbs_positions=tuple((10.0 + 10.0 * n, 60.0) for n in range(sbs)),
            area_side=side,
        )
        k = mmw_blocks + sub6_blocks
        if gains is None:
            gains = np.ones((mbs, sub6_blocks, sbs))
        tx_power = np.empty((mbs, k, sbs))
        tx_power[:, :mmw_blocks, :] = mmw_power_mw
        tx_power[:, mmw_blocks:, :] = sub6_power
        blocks = ResourceBlockSet(
            mmw_blocks=tuple(range(mmw_blocks)),
            sub6_blocks=tuple(range(mmw_blocks, k)),
            bandwidth=tuple([bandwidth] * k),
            tx_power=tx_power,
        )
        if current is None:
            current = tuple(unit_files([1.0]) for _ in range(sbs))
        if predicted is None:
            predicted = tuple(() for _ in range(sbs))
        return Scenario(
            topology=topology,
            mmw=MmwParams(alpha=2.0, beta=61.4, zeta2=0.0, noise_n1=20.0),
            sub6=Sub6Params(noise_n2, gains),
            blocks=blocks,
            wired=WiredBackhaul.evenly_split(wired, mbs),
            demand=DemandModel(tuple(current), tuple(predicted)),
            deviations=np.zeros((mbs, sbs)),
        )
    return _make
