"""
Network Models for the Backhaul Simulator
Defines topology, channel parameters, resource blocks and the wired backhaul
"""

from enum import Enum
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Tuple

import numpy as np

from core.errors import ModelDomainError
from models.demand import DemandModel

Position = Tuple[float, float]


class BlockBand(Enum):
    MMW = "mmW"
    SUB6 = "sub-6 GHz"


@dataclass(frozen=True)
class Topology:
    """MBS and SBS positions inside a square area (meters)"""
    mbs_positions: Tuple[Position, ...]
    sbs_positions: Tuple[Position, ...]
    area_side: float

    def __post_init__(self):
        if not self.mbs_positions or not self.sbs_positions:
            raise ModelDomainError("topology needs at least one MBS and one SBS")
        for x, y in self.mbs_positions + self.sbs_positions:
            if not (0.0 <= x <= self.area_side and 0.0 <= y <= self.area_side):
                raise ModelDomainError(
                    f"position ({x}, {y}) outside [0, {self.area_side}]^2"
                )

    @property
    def mbs_count(self) -> int:
        return len(self.mbs_positions)

    @property
    def sbs_count(self) -> int:
        return len(self.sbs_positions)

    @cached_property
    def distances(self) -> np.ndarray:
        """Euclidean MBS-to-SBS distances, shape (M, N)"""
        mbs = np.asarray(self.mbs_positions, dtype=float)
        sbs = np.asarray(self.sbs_positions, dtype=float)
        return np.linalg.norm(mbs[:, None, :] - sbs[None, :, :], axis=-1)


@dataclass(frozen=True)
class MmwParams:
    """Fitted mmW path loss model and the SNR noise denominator N1"""
    alpha: float
    beta: float
    zeta2: float
    noise_n1: float

    def __post_init__(self):
        if self.zeta2 < 0:
            raise ModelDomainError("zeta2 must be >= 0")
        if self.noise_n1 <= 0:
            raise ModelDomainError("noise_n1 must be > 0")


@dataclass(frozen=True)
class Sub6Params:
    """Receiver noise and |h|^2 gains indexed (MBS, sub-6 block index, SBS)"""
    noise_n2: float
    channel_gains: np.ndarray = field(compare=False)

    def __post_init__(self):
        if self.noise_n2 <= 0:
            raise ModelDomainError("noise_n2 must be > 0")
        if np.any(self.channel_gains < 0):
            raise ModelDomainError("channel gains must be >= 0")


@dataclass(frozen=True)
class ResourceBlockSet:
    """
    Backhaul resource blocks. Block ids are global; mmW ids and sub-6 ids
    are disjoint. tx_power is indexed (MBS, block id, SBS): milliwatts for
    mmW blocks, so 10*log10(P) is in dBm, and watts for sub-6 blocks.
    """
    mmw_blocks: Tuple[int, ...]
    sub6_blocks: Tuple[int, ...]
    bandwidth: Tuple[float, ...]
    tx_power: np.ndarray = field(compare=False)

    def __post_init__(self):
        if set(self.mmw_blocks) & set(self.sub6_blocks):
            raise ModelDomainError("mmW and sub-6 block ids must be disjoint")
        if len(self.bandwidth) != self.block_count:
            raise ModelDomainError("one bandwidth per block is required")
        if any(w <= 0 for w in self.bandwidth):
            raise ModelDomainError("bandwidths must be > 0")
        if self.block_count and np.any(self.tx_power <= 0):
            raise ModelDomainError("transmit powers must be > 0")

    @property
    def block_count(self) -> int:
        return len(self.mmw_blocks) + len(self.sub6_blocks)

    @property
    def all_blocks(self) -> Tuple[int, ...]:
        return tuple(sorted(self.mmw_blocks + self.sub6_blocks))

    def band(self, k: int) -> BlockBand:
        if k in self.mmw_blocks:
            return BlockBand.MMW
        if k in self.sub6_blocks:
            return BlockBand.SUB6
        raise ModelDomainError(f"unknown resource block {k}")

    def sub6_index(self, k: int) -> int:
        """Position of block k inside the sub-6 gain tensor"""
        return self.sub6_blocks.index(k)


@dataclass(frozen=True)
class WiredBackhaul:
    """Wired capacity per MBS (c'_m) under the shared maximum C_max"""
    per_mbs_capacity: Tuple[float, ...]
    c_max: float

    def __post_init__(self):
        if self.c_max < 0 or any(c < 0 for c in self.per_mbs_capacity):
            raise ModelDomainError("wired capacities must be >= 0")
        # small slack for the c_max / M split
        if sum(self.per_mbs_capacity) > self.c_max * (1 + 1e-12):
            raise ModelDomainError("sum of per-MBS wired capacity exceeds c_max")

    @classmethod
    def evenly_split(cls, c_max: float, mbs_count: int) -> "WiredBackhaul":
        return cls(tuple([c_max / mbs_count] * mbs_count), c_max)


@dataclass(frozen=True)
class Scenario:
    """One realized experiment instance: static channel plus demands"""
    topology: Topology
    mmw: MmwParams
    sub6: Sub6Params
    blocks: ResourceBlockSet
    wired: WiredBackhaul
    demand: DemandModel
    deviations: np.ndarray = field(compare=False)
    seed: int = 0

    def __post_init__(self):
        m, n = self.topology.mbs_count, self.topology.sbs_count
        if self.deviations.shape != (m, n):
            raise ModelDomainError(f"deviations must have shape ({m}, {n})")
        if self.demand.sbs_count != n:
            raise ModelDomainError("demand model and topology disagree on SBS count")
        if self.blocks.block_count and self.blocks.tx_power.shape != (m, self.blocks.block_count, n):
            raise ModelDomainError("tx_power must be indexed (MBS, block, SBS)")
        expected_gains = (m, len(self.blocks.sub6_blocks), n)
        if self.sub6.channel_gains.shape != expected_gains:
            raise ModelDomainError(f"sub-6 gains must have shape {expected_gains}")

    @cached_property
    def mmw_losses(self) -> np.ndarray:
        """mmW path loss per (MBS, SBS) with the realized fit deviations"""
        from core.netmodel import mmw_path_loss
        distances = np.maximum(self.topology.distances, 1.0)
        losses = np.empty_like(distances)
        for (m, n), d in np.ndenumerate(distances):
            losses[m, n] = mmw_path_loss(d, self.mmw, self.deviations[m, n])
        return losses

    @property
    def mbs_count(self) -> int:
        return self.topology.mbs_count

    @property
    def sbs_count(self) -> int:
        return self.topology.sbs_count

    def with_wired_capacity(self, c_max: float) -> "Scenario":
        """Copy with the wired capacity rescaled to a new C_max"""
        c_max = max(c_max, 0.0)
        old = self.wired
        if old.c_max > 0:
            ratio = c_max / old.c_max
            per_mbs = tuple(c * ratio for c in old.per_mbs_capacity)
        else:
            per_mbs = WiredBackhaul.evenly_split(c_max, self.mbs_count).per_mbs_capacity
        return replace(self, wired=WiredBackhaul(per_mbs, c_max))

    def with_demand(self, demand: DemandModel) -> "Scenario":
        return replace(self, demand=demand)
