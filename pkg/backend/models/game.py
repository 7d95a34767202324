"""
Game Models for the Backhaul Minority Game
Defines actions, the simplified binary game and strategy profiles
"""

from enum import Enum
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from core.errors import ModelDomainError


class Action(Enum):
    REQUEST = "c"   # download and cache the assigned file
    DEFER = "d"     # leave the file for a later period


@dataclass(frozen=True)
class GameSpec:
    """
    Simplified game over G binary players (real SBSs plus virtual ones).
    u_c[f - 1] is the utility of requesting when f players request;
    u_d[f_d - 1] = -u_c[G - f_d] is the utility of deferring when f_d
    players defer. Utilities are in units of `unit` bits/s.
    """
    g: int
    phi: int
    u_c: np.ndarray = field(compare=False)
    owners: Tuple[int, ...] = ()
    real_count: int = 0
    file_bits: Tuple[float, ...] = ()
    player_tables: Optional[np.ndarray] = field(default=None, compare=False)
    asymmetry: float = 0.0
    unit: float = 1.0

    def __post_init__(self):
        if self.g < 1:
            raise ModelDomainError("a game needs at least one player")
        if self.u_c.shape != (self.g,):
            raise ModelDomainError(f"u_c must hold G={self.g} entries")
        if not np.all(np.isfinite(self.u_c)):
            raise ModelDomainError("utilities must be finite")
        if self.owners and len(self.owners) != self.g:
            raise ModelDomainError("one owner per player is required")

    @classmethod
    def from_table(cls, u_c: Sequence[float], phi: int = 0) -> "GameSpec":
        """Game from a bare utility table; every player is its own SBS"""
        table = np.asarray(u_c, dtype=float)
        g = len(table)
        return cls(g=g, phi=phi, u_c=table, owners=tuple(range(g)), real_count=g,
                   file_bits=tuple([1.0] * g))

    @property
    def u_d(self) -> np.ndarray:
        """Deferring utilities by f_d = 1..G, exact negation of the u_c table"""
        return -self.u_c[::-1]

    @property
    def virtual_owners(self) -> Dict[int, int]:
        """Virtual player index -> owning real SBS"""
        return {i: self.owners[i] for i in range(self.real_count, self.g)}

    def realized(self, action: Action, request_count: int) -> float:
        """Utility of `action` when `request_count` players (all included) request"""
        if action is Action.REQUEST:
            return float(self.u_c[request_count - 1])
        return float(self.u_d[self.g - request_count - 1])

    def sign_structure_violations(self) -> int:
        """Entries breaking u_c >= 0 up to phi and u_c <= 0 beyond it"""
        f = np.arange(1, self.g + 1)
        below = (f <= self.phi) & (self.u_c < 0)
        above = (f > self.phi) & (self.u_c > 0)
        return int(below.sum() + above.sum())


@dataclass(frozen=True)
class MixedProfile:
    """Probability of requesting, one entry per player"""
    p: np.ndarray = field(compare=False)

    def __post_init__(self):
        if np.any(self.p < 0) or np.any(self.p > 1):
            raise ModelDomainError("probabilities must lie in [0, 1]")

    @classmethod
    def uniform(cls, g: int, value: float = 0.5) -> "MixedProfile":
        return cls(np.full(g, value, dtype=float))

    @property
    def is_proper(self) -> bool:
        return bool(np.all((self.p > 0) & (self.p < 1)))

    def distance(self, other: "MixedProfile") -> float:
        return float(np.max(np.abs(self.p - other.p)))


@dataclass(frozen=True)
class PureProfile:
    """Number of predicted files each real SBS requests"""
    s: Tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.s)

    def validate(self, file_counts: Sequence[int]) -> None:
        if len(self.s) != len(file_counts):
            raise ModelDomainError("one request count per SBS is required")
        for n, (s_n, f_n) in enumerate(zip(self.s, file_counts)):
            if not 0 <= s_n <= f_n:
                raise ModelDomainError(f"s_{n}={s_n} outside [0, {f_n}]")

    def deviate(self, n: int, s_n: int) -> "PureProfile":
        s = list(self.s)
        s[n] = s_n
        return PureProfile(tuple(s))


@dataclass(frozen=True)
class Deviation:
    """A profitable unilateral move: SBS n switching to s_n gains `gain`"""
    n: int
    s_n: int
    gain: float


@dataclass(frozen=True)
class NashCheck:
    is_equilibrium: bool
    witness: Optional[Deviation] = None
