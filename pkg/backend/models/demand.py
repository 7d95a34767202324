"""
Demand Models for the Backhaul Simulator
Defines files, per-SBS current/predicted demand and backhaul assignments
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from core.errors import ModelDomainError


@dataclass(frozen=True)
class FileSpec:
    """A file to be served: size L_f, deadline x_f and serving rate q_f"""
    size_bits: float
    deadline_s: float
    serving_rate: float

    def __post_init__(self):
        if self.size_bits <= 0 or self.deadline_s <= 0:
            raise ModelDomainError("file size and deadline must be > 0")
        if self.serving_rate < 0:
            raise ModelDomainError("serving rate must be >= 0")

    @property
    def required_rate(self) -> float:
        """L_f / x_f in bits/s"""
        return self.size_bits / self.deadline_s

    @classmethod
    def from_size(cls, size_bits: float, deadline_s: float) -> "FileSpec":
        """File whose serving rate equals its required rate"""
        return cls(size_bits, deadline_s, size_bits / deadline_s)


@dataclass(frozen=True)
class DemandModel:
    """
    Per-SBS current files F'_n and predicted files F_n.
    Predicted tuples are in request priority order: the first s_n entries
    are the files SBS n requests when it plays s_n.
    """
    current: Tuple[Tuple[FileSpec, ...], ...]
    predicted: Tuple[Tuple[FileSpec, ...], ...]

    def __post_init__(self):
        if len(self.current) != len(self.predicted):
            raise ModelDomainError("current and predicted lists must cover the same SBSs")
        if not self.current:
            raise ModelDomainError("demand model needs at least one SBS")

    @property
    def sbs_count(self) -> int:
        return len(self.current)

    @property
    def file_counts(self) -> Tuple[int, ...]:
        """F_n for every SBS"""
        return tuple(len(files) for files in self.predicted)

    @property
    def total_predicted(self) -> int:
        return sum(self.file_counts)

    def predicted_bits(self, n: int, s_n: int) -> float:
        """Size of the first s_n predicted files of SBS n"""
        return float(sum(f.size_bits for f in self.predicted[n][:s_n]))


@dataclass(frozen=True)
class BackhaulAssignment:
    """
    Output of the backhaul allocator.
    eta[k, m, n] = 1 when MBS m serves SBS n on block k;
    wired[m, n] = c_mn in bits/s.
    """
    eta: np.ndarray = field(compare=False)
    wired: np.ndarray = field(compare=False)

    def __post_init__(self):
        if np.any(self.eta.sum(axis=2) > 1):
            raise ModelDomainError("an (MBS, block) pair may serve at most one SBS")

    def transmitting_mbs(self, k: int) -> List[int]:
        """MBSs that serve some SBS on block k"""
        if k >= self.eta.shape[0]:
            return []
        return [int(m) for m in np.flatnonzero(self.eta[k].any(axis=1))]

    def blocks_held(self, n: int) -> List[Tuple[int, int]]:
        """(MBS, block) pairs assigned to SBS n"""
        ks, ms = np.nonzero(self.eta[:, :, n])
        return [(int(m), int(k)) for k, m in zip(ks, ms)]

    def same_as(self, other: "BackhaulAssignment") -> bool:
        return (np.array_equal(self.eta, other.eta)
                and np.array_equal(self.wired, other.wired))
