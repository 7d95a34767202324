"""
Scenario Configuration
pydantic schema for experiment config files; unknown keys are rejected
"""

from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.learning import KappaMode

Position = Tuple[float, float]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PredictedSplit(str, Enum):
    RANDOM = "random"   # multinomial over SBSs
    EVEN = "even"


def _as_list(value):
    # a single list element arrives unwrapped from the flat parser
    if value is None or isinstance(value, list):
        return value
    return [value]


class ScenarioSection(StrictModel):
    name: str = "default"
    description: str = ""


class TopologyConfig(StrictModel):
    area_side: float = Field(2000.0, gt=0)
    mbs_count: int = Field(2, ge=1)
    sbs_count: int = Field(5, ge=1)
    mbs_positions: Optional[List[Position]] = None
    sbs_positions: Optional[List[Position]] = None

    @field_validator("mbs_positions", "sbs_positions", mode="before")
    @classmethod
    def wrap_single_position(cls, value):
        if isinstance(value, tuple):
            return [value]
        return value

    @model_validator(mode="after")
    def check_positions(self):
        for label, positions, count in (("mbs_positions", self.mbs_positions, self.mbs_count),
                                        ("sbs_positions", self.sbs_positions, self.sbs_count)):
            if positions is None:
                continue
            if len(positions) != count:
                raise ValueError(f"{label} lists {len(positions)} positions for {count} stations")
            for x, y in positions:
                if not (0 <= x <= self.area_side and 0 <= y <= self.area_side):
                    raise ValueError(f"{label}: ({x}, {y}) lies outside the area")
        return self


class MmwChannelConfig(StrictModel):
    alpha: float = 2.0
    beta: float = 61.4
    zeta2: float = Field(5.8 ** 2, ge=0)
    noise_n1: float = Field(20.0, gt=0)


class Sub6ChannelConfig(StrictModel):
    noise_n2: float = Field(3.16e-13, gt=0)
    path_loss_intercept: float = 128.1
    path_loss_slope: float = 37.6


class ChannelConfig(StrictModel):
    mmw: MmwChannelConfig = Field(default_factory=MmwChannelConfig)
    sub6: Sub6ChannelConfig = Field(default_factory=Sub6ChannelConfig)


class BlocksConfig(StrictModel):
    mmw_count: int = Field(2, ge=0)
    mmw_bandwidth: float = Field(100e6, gt=0)
    mmw_power_dbm: float = 30.0
    sub6_count: int = Field(3, ge=0)
    sub6_bandwidth: float = Field(10e6, gt=0)
    sub6_power: float = Field(20.0, gt=0)

    @property
    def block_count(self) -> int:
        return self.mmw_count + self.sub6_count


class WiredConfig(StrictModel):
    c_max: float = Field(1e9, ge=0)
    per_mbs: Optional[List[float]] = None

    @field_validator("per_mbs", mode="before")
    @classmethod
    def wrap_single_capacity(cls, value):
        return _as_list(value)

    @model_validator(mode="after")
    def check_split(self):
        if self.per_mbs is not None:
            if any(c < 0 for c in self.per_mbs):
                raise ValueError("per-MBS capacities must be >= 0")
            if sum(self.per_mbs) > self.c_max * (1 + 1e-12):
                raise ValueError("per-MBS capacities exceed c_max")
        return self


class BackhaulConfig(StrictModel):
    wired: WiredConfig = Field(default_factory=WiredConfig)


class DemandConfig(StrictModel):
    predicted_total: int = Field(150, ge=0)
    predicted_split: PredictedSplit = PredictedSplit.RANDOM
    current_per_sbs: int = Field(28, ge=0)
    size_min: float = Field(4e6, gt=0)
    size_max: float = Field(40e6, gt=0)
    deadline_min: float = Field(1.0, gt=0)
    deadline_max: float = Field(10.0, gt=0)

    @model_validator(mode="after")
    def check_ranges(self):
        if self.size_min > self.size_max:
            raise ValueError("size_min exceeds size_max")
        if self.deadline_min > self.deadline_max:
            raise ValueError("deadline_min exceeds deadline_max")
        return self


class GameConfig(StrictModel):
    utility_unit: float = Field(1.0, gt=0)
    pmne_tol: float = Field(1e-9, gt=0)


class LearningConfig(StrictModel):
    kappa: float = Field(0.001, gt=0)
    kappa_mode: KappaMode = KappaMode.CONSTANT
    alpha_exponent: float = Field(1.0, ge=0)
    lambda_exponent: float = Field(2.0, ge=0)
    # None: 1% of |u(c, 1)|
    noise_sigma: Optional[float] = Field(None, ge=0)
    tol: float = Field(1e-3, gt=0)
    window: int = Field(50, ge=1)
    max_iterations: int = Field(100_000, ge=1)
    bge_tol: float = Field(1e-10, gt=0)
    trace: bool = False


class BaselinesConfig(StrictModel):
    # None: 0.5% of c_max per SBS per round
    cga_overhead_per_sbs: Optional[float] = Field(None, ge=0)
    cga_batch: int = Field(1, ge=1)


class ExperimentConfig(StrictModel):
    seed: int = Field(0, ge=0)
    runs: int = Field(100, ge=1)


class ScenarioConfig(StrictModel):
    scenario: ScenarioSection = Field(default_factory=ScenarioSection)
    topology: TopologyConfig = Field(default_factory=TopologyConfig)
    channel: ChannelConfig = Field(default_factory=ChannelConfig)
    blocks: BlocksConfig = Field(default_factory=BlocksConfig)
    backhaul: BackhaulConfig = Field(default_factory=BackhaulConfig)
    demand: DemandConfig = Field(default_factory=DemandConfig)
    game: GameConfig = Field(default_factory=GameConfig)
    learning: LearningConfig = Field(default_factory=LearningConfig)
    baselines: BaselinesConfig = Field(default_factory=BaselinesConfig)
    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig)

    @model_validator(mode="after")
    def check_counts(self):
        per_mbs = self.backhaul.wired.per_mbs
        if per_mbs is not None and len(per_mbs) != self.topology.mbs_count:
            raise ValueError("backhaul.wired.per_mbs needs one entry per MBS")
        return self

    @property
    def cga_overhead(self) -> float:
        overhead = self.baselines.cga_overhead_per_sbs
        if overhead is None:
            return 0.005 * self.backhaul.wired.c_max
        return overhead
