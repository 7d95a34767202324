"""
Metric Models
Results of the download-decision algorithms and the experiment aggregates
"""

from enum import Enum
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

from core.errors import ModelDomainError


class Algorithm(Enum):
    BMRL = "bmrl"   # decentralized Boltzmann-Gibbs learning
    OCA = "oca"     # optimal centralized, no signaling cost
    CGA = "cga"     # centralized greedy with signaling overhead
    RFA = "rfa"     # random fair, capacity blind


@dataclass(frozen=True)
class BaselineResult:
    """Outcome of one algorithm on one scenario"""
    algorithm: Algorithm
    downloaded: Tuple[int, ...]
    requested_bits: float
    slack_bps: float
    overhead_bps: float = 0.0
    requested_files: Optional[float] = None

    def __post_init__(self):
        if any(d < 0 for d in self.downloaded):
            raise ModelDomainError("downloaded counts must be >= 0")
        if self.requested_files is None:
            object.__setattr__(self, "requested_files", float(sum(self.downloaded)))

    @property
    def total_downloaded(self) -> int:
        return sum(self.downloaded)

    def check_counts(self, file_counts: Sequence[int]) -> None:
        for n, (d, f) in enumerate(zip(self.downloaded, file_counts)):
            if d > f:
                raise ModelDomainError(f"SBS {n} downloaded {d} of {f} files")


@dataclass(frozen=True)
class RunMetrics:
    """One (scenario, algorithm, seed) run"""
    algorithm: Algorithm
    seed: int
    phi: int
    requested_files: float
    requested_bits: float
    slack_bps: float
    downloaded: Tuple[int, ...] = ()
    iterations: Optional[int] = None
    converged: bool = True
    final_p: Tuple[float, ...] = ()
    utility: Optional[float] = None
    overhead_bps: float = 0.0
    axis_value: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "seed": self.seed,
            "phi": self.phi,
            "requested_files": self.requested_files,
            "requested_bits": self.requested_bits,
            "slack_bps": self.slack_bps,
            "downloaded": list(self.downloaded),
            "iterations": self.iterations,
            "converged": self.converged,
            "final_p": list(self.final_p),
            "utility": self.utility,
            "overhead_bps": self.overhead_bps,
            "axis_value": self.axis_value,
        }


@dataclass(frozen=True)
class AggregateMetrics:
    """One CSV row: an algorithm at one sweep point, over all runs"""
    axis_value: float
    algorithm: Algorithm
    runs: int
    mean_requested_bits: float
    std_requested_bits: float
    mean_slack_bps: float
    iterations_mean: Optional[float]
    oca_match_fraction: Optional[float]


@dataclass
class ComparisonSummary:
    """BMRL against the baselines over seed-aligned runs"""
    runs: int
    oca_match_fraction: float
    improvement_over_cga: float
    improvement_over_rfa: float
    mean_requested_bits: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "oca_match_fraction": self.oca_match_fraction,
            "improvement_over_cga": self.improvement_over_cga,
            "improvement_over_rfa": self.improvement_over_rfa,
            "mean_requested_bits": dict(self.mean_requested_bits),
        }


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}
