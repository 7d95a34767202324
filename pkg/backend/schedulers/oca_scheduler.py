"""
Optimal Centralized Scheduler (OCA)
Admits exactly min(phi, total) predicted files with no signaling cost,
always serving the SBS with the fewest downloads first
"""

import heapq
import logging
from typing import List, Optional

import numpy as np

from core.allocation import compute_phi
from models.metrics import Algorithm, BaselineResult
from models.network import Scenario
from schedulers.base_scheduler import BaseScheduler, backhaul_slack, requested_bits

logger = logging.getLogger(__name__)


class OCAScheduler(BaseScheduler):
    """Fair centralized admission using a min-heap on download counts"""

    def __init__(self):
        super().__init__("Optimal Centralized (OCA)", Algorithm.OCA)
        self.fair_queue = []  # (downloaded, sbs id)

    def get_next_sbs(self) -> Optional[int]:
        """SBS served next: fewest downloads, lowest id"""
        if self.fair_queue:
            _, n = self.fair_queue[0]
            return n
        return None

    def admit(self, file_counts: List[int], budget: int) -> List[int]:
        """Hand out `budget` files one at a time by the fairness rule"""
        downloaded = [0] * len(file_counts)
        self.fair_queue = [(0, n) for n, f in enumerate(file_counts) if f > 0]
        heapq.heapify(self.fair_queue)

        while budget > 0 and self.fair_queue:
            count, n = heapq.heappop(self.fair_queue)
            downloaded[n] = count + 1
            budget -= 1
            # SBSs with nothing left drop out of the queue
            if downloaded[n] < file_counts[n]:
                heapq.heappush(self.fair_queue, (downloaded[n], n))
        return downloaded

    def schedule(self, scenario: Scenario,
                 rng: Optional[np.random.Generator] = None) -> BaselineResult:
        phi = compute_phi(scenario)
        file_counts = list(scenario.demand.file_counts)
        downloaded = self.admit(file_counts, min(phi, sum(file_counts)))
        logger.debug("OCA admitted %d files (phi=%d)", sum(downloaded), phi)
        return BaselineResult(
            algorithm=self.algorithm,
            downloaded=tuple(downloaded),
            requested_bits=requested_bits(scenario, downloaded),
            slack_bps=backhaul_slack(scenario, downloaded),
        )
