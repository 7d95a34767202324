"""
Centralized Greedy Scheduler (CGA)
Round-based fair admission where every round of signaling with the central
entity consumes wired backhaul capacity
"""

import logging
from typing import Optional

import numpy as np

from core.allocation import compute_phi, is_feasible, priority_shares
from core.errors import ModelDomainError
from models.metrics import Algorithm, BaselineResult
from models.network import Scenario
from schedulers.base_scheduler import (
    BaseScheduler, admit_fairly, backhaul_slack, requested_bits
)

logger = logging.getLogger(__name__)


def shrink_phi(scenario: Scenario, upper: int) -> int:
    """Largest f <= upper that is still feasible, searching downward"""
    for f in range(upper, 0, -1):
        if is_feasible(scenario, priority_shares(scenario.demand, f)):
            return f
    return 0


class CGAScheduler(BaseScheduler):
    """Centralized greedy admission with per-round signaling overhead"""

    def __init__(self, overhead_per_sbs: float = 0.0, batch: int = 1):
        """
        Initialize CGA
        Args:
            overhead_per_sbs: signaling rate (bits/s) each SBS costs per round
            batch: files admitted per selected SBS per round
        """
        if overhead_per_sbs < 0:
            raise ModelDomainError("overhead_per_sbs must be >= 0")
        if batch < 1:
            raise ModelDomainError("batch must be >= 1")
        super().__init__(f"Centralized Greedy (CGA, batch {batch})", Algorithm.CGA)
        self.overhead_per_sbs = overhead_per_sbs
        self.batch = batch

    def schedule(self, scenario: Scenario,
                 rng: Optional[np.random.Generator] = None) -> BaselineResult:
        """
        CGA rounds:
        - signaling for the round takes N * overhead_per_sbs off the wired capacity
        - phi' is recomputed on the reduced backhaul (it never grows)
        - the lowest-count SBSs are admitted `batch` files each up to phi'
        """
        file_counts = list(scenario.demand.file_counts)
        downloaded = [0] * scenario.sbs_count
        phi_prime = compute_phi(scenario)
        overhead = 0.0
        rounds = 0

        while sum(downloaded) < sum(file_counts):
            rounds += 1
            overhead += scenario.sbs_count * self.overhead_per_sbs
            if overhead > 0:
                reduced = scenario.with_wired_capacity(scenario.wired.c_max - overhead)
                phi_prime = shrink_phi(reduced, phi_prime)
            budget = phi_prime - sum(downloaded)
            if budget <= 0:
                break
            admitted = admit_fairly(downloaded, file_counts, budget, self.batch)
            logger.debug("CGA round %d: phi'=%d, admitted %d", rounds, phi_prime, admitted)
            if admitted == 0:
                break

        return BaselineResult(
            algorithm=self.algorithm,
            downloaded=tuple(downloaded),
            requested_bits=requested_bits(scenario, downloaded),
            slack_bps=backhaul_slack(scenario, downloaded),
            overhead_bps=overhead,
        )
