"""
Learning Models for the Backhaul Minority Game
Defines learner state, step-size schedules, observation noise and results
"""

from enum import Enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.errors import ModelDomainError
from models.game import MixedProfile


class KappaMode(Enum):
    CONSTANT = "constant"
    DECAYING = "decaying"   # kappa(t) = kappa / t


@dataclass(frozen=True)
class LearnerState:
    """
    Estimated utilities u_hat[i] = (u_hat(c), u_hat(d)) and request
    probabilities p[i] of every player after t sub-slots
    """
    u_hat: np.ndarray = field(compare=False)
    p: np.ndarray = field(compare=False)
    t: int = 0

    def __post_init__(self):
        if self.u_hat.shape != (len(self.p), 2):
            raise ModelDomainError("u_hat must hold one (c, d) pair per player")
        if np.any(self.p < 0) or np.any(self.p > 1):
            raise ModelDomainError("probabilities must lie in [0, 1]")
        if not np.all(np.isfinite(self.u_hat)):
            raise ModelDomainError("utility estimates must be finite")
        if self.t < 0:
            raise ModelDomainError("t must be >= 0")

    @classmethod
    def initial(cls, g: int) -> "LearnerState":
        """u_hat(0) = (0, 0) and p(0) = 1/2 for every player"""
        return cls(np.zeros((g, 2)), np.full(g, 0.5), 0)

    @property
    def player_count(self) -> int:
        return len(self.p)

    def profile(self) -> MixedProfile:
        return MixedProfile(self.p.copy())


@dataclass(frozen=True)
class StepSchedule:
    """
    alpha(t) = alpha_scale / t**alpha_exponent drives the utility estimates,
    lambda_n(t) = lambda_scale / t**lambda_exponent_n the strategies.
    `lambda_exponents` gives per-player exponents; None means all players
    share `lambda_exponent`.
    """
    kappa: float = 0.001
    alpha_exponent: float = 1.0
    lambda_exponent: float = 2.0
    alpha_scale: float = 1.0
    lambda_scale: float = 1.0
    kappa_mode: KappaMode = KappaMode.CONSTANT
    lambda_exponents: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kappa <= 0:
            raise ModelDomainError("kappa must be > 0")
        if self.alpha_scale < 0 or self.lambda_scale < 0:
            raise ModelDomainError("step scales must be >= 0")

    def alpha(self, t: int) -> float:
        return self.alpha_scale / t ** self.alpha_exponent

    def lambdas(self, t: int, g: int) -> np.ndarray:
        if self.lambda_exponents is None:
            return np.full(g, self.lambda_scale / t ** self.lambda_exponent)
        if len(self.lambda_exponents) != g:
            raise ModelDomainError(f"expected {g} per-player lambda exponents")
        return self.lambda_scale / t ** np.asarray(self.lambda_exponents, dtype=float)

    def kappa_at(self, t: int) -> float:
        if self.kappa_mode is KappaMode.DECAYING:
            return self.kappa / max(t, 1)
        return self.kappa


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian observation error"""
    sigma: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ModelDomainError("noise sigma must be >= 0")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.sigma == 0:
            return np.zeros(size)
        return rng.normal(0.0, self.sigma, size)


@dataclass(frozen=True)
class ScheduleReport:
    """Pass/fail of each step-size condition with the measured quantity"""
    checks: Dict[str, bool]
    measurements: Dict[str, float]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> List[str]:
        return [name for name, ok in self.checks.items() if not ok]


@dataclass(frozen=True)
class TraceRecord:
    t: int
    player: int
    action: str
    observed_u: float
    p: float

    def to_dict(self) -> dict:
        return {"t": self.t, "player": self.player, "action": self.action,
                "observed_u": self.observed_u, "p": self.p}


@dataclass
class LearningResult:
    profile: MixedProfile
    iterations: int
    converged: bool
    trace: List[TraceRecord] = field(default_factory=list)
