"""
Base Scheduler Interface
Defines the abstract interface for all predicted-file download algorithms
"""

from abc import ABC, abstractmethod
from typing import List, Optional, Sequence

import numpy as np

from core.allocation import allocate, required_rates
from core.netmodel import total_rates
from models.metrics import Algorithm, BaselineResult
from models.network import Scenario


class BaseScheduler(ABC):
    """Abstract base class for all download-decision algorithms"""

    def __init__(self, name: str, algorithm: Algorithm):
        self.name = name
        self.algorithm = algorithm
        self.results: List[BaselineResult] = []
        self.metrics = {
            'runs': 0,
            'mean_requested_files': 0.0,
            'mean_requested_bits': 0.0,
            'mean_slack_bps': 0.0
        }

    @abstractmethod
    def schedule(self, scenario: Scenario,
                 rng: Optional[np.random.Generator] = None) -> BaselineResult:
        """
        Decide how many predicted files every SBS downloads
        Returns: BaselineResult with per-SBS counts, requested bits and slack
        """
        pass

    def run(self, scenario: Scenario,
            rng: Optional[np.random.Generator] = None) -> BaselineResult:
        """Schedule one scenario and keep the result for calculate_metrics"""
        result = self.schedule(scenario, rng)
        result.check_counts(scenario.demand.file_counts)
        self.results.append(result)
        return result

    def calculate_metrics(self):
        """Average the kept results"""
        if not self.results:
            return self.metrics

        count = len(self.results)
        self.metrics['runs'] = count
        self.metrics['mean_requested_files'] = sum(r.requested_files for r in self.results) / count
        self.metrics['mean_requested_bits'] = sum(r.requested_bits for r in self.results) / count
        self.metrics['mean_slack_bps'] = sum(r.slack_bps for r in self.results) / count

        return self.metrics

    def reset(self):
        """Reset scheduler state"""
        self.results.clear()
        self.metrics = {
            'runs': 0,
            'mean_requested_files': 0.0,
            'mean_requested_bits': 0.0,
            'mean_slack_bps': 0.0
        }


def backhaul_slack(scenario: Scenario, counts: Sequence[int]) -> float:
    """Sum over SBSs of r_n - R_n - D_n(s_n); negative when the backhaul is overloaded"""
    current, predicted = required_rates(scenario.demand, counts)
    rates = total_rates(allocate(scenario, counts), scenario)
    return float(np.sum(rates - current - predicted))


def requested_bits(scenario: Scenario, counts: Sequence[int]) -> float:
    return sum(scenario.demand.predicted_bits(n, s_n) for n, s_n in enumerate(counts))


def admit_fairly(downloaded: List[int], file_counts: Sequence[int], budget: int,
                 batch: int = 1) -> int:
    """
    One admission round: SBSs in ascending (downloaded, id) order each take
    up to `batch` more files while the budget lasts. Updates `downloaded`
    in place and returns the number of files admitted.
    """
    admitted = 0
    order = sorted(range(len(downloaded)), key=lambda n: (downloaded[n], n))
    for n in order:
        if admitted >= budget:
            break
        take = min(batch, file_counts[n] - downloaded[n], budget - admitted)
        if take > 0:
            downloaded[n] += take
            admitted += take
    return admitted
