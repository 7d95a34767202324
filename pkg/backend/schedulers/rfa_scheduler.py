"""
Random Fair Scheduler (RFA)
Capacity-blind baseline: every predicted file is requested with probability 1/2
"""

from typing import Optional

import numpy as np

from models.demand import DemandModel
from models.metrics import Algorithm, BaselineResult
from models.network import Scenario
from schedulers.base_scheduler import BaseScheduler, backhaul_slack

REQUEST_PROBABILITY = 0.5


class RFAScheduler(BaseScheduler):
    """Random fair scheduler"""

    def __init__(self):
        super().__init__("Random Fair (RFA)", Algorithm.RFA)

    def schedule(self, scenario: Scenario,
                 rng: Optional[np.random.Generator] = None) -> BaselineResult:
        if rng is None:
            rng = np.random.default_rng(scenario.seed)
        demand = scenario.demand
        reordered, downloaded, bits = [], [], 0.0
        for files in demand.predicted:
            chosen = rng.random(len(files)) < REQUEST_PROBABILITY
            picked = [f for f, c in zip(files, chosen) if c]
            rest = [f for f, c in zip(files, chosen) if not c]
            # requested files first so the prefix rule charges exactly them
            reordered.append(tuple(picked + rest))
            downloaded.append(len(picked))
            bits += sum(f.size_bits for f in picked)

        requested = scenario.with_demand(DemandModel(demand.current, tuple(reordered)))
        return BaselineResult(
            algorithm=self.algorithm,
            downloaded=tuple(downloaded),
            requested_bits=bits,
            slack_bps=backhaul_slack(requested, downloaded),
        )
