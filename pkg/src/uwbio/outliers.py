"""Triangle-inequality screening of range measurements.

A clean pair of range samples can never differ by more than the sum of the
two robots' displacements in between.  Each candidate is voted on by a
bounded queue of previously accepted triplets; a majority of violations
(strictly above the threshold) marks it as an outlier and it is discarded
without touching the queue.  The queue keeps only the freshest accepted
triplets so odometry drift cannot poison old comparisons.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .sensing import MeasurementTriplet


@dataclass(frozen=True)
class ScreenResult:
    is_outlier: bool
    votes: int
    queue_size: int     # queue size at voting time


class JudgeQueue:
    """Bounded queue of accepted triplets used to vote on new candidates."""

    def __init__(self, capacity: int = 20, threshold: float = 0.5):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        if not 0.0 < threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        self.capacity = capacity
        self.threshold = threshold
        self.entries: deque[MeasurementTriplet] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self.entries)

    def screen(self, candidate: MeasurementTriplet) -> ScreenResult:
        """Vote the candidate against the queue; accepted candidates are enqueued.

        An entry votes "outlier" when the range difference meets or exceeds
        the summed odometry displacements since that entry.  The verdict is
        outlier iff votes / size is strictly above the threshold; an empty
        queue accepts unconditionally (cold start).
        """
        votes = 0
        for entry in self.entries:
            slack = (np.linalg.norm(candidate.z_i - entry.z_i)
                     + np.linalg.norm(candidate.z_j - entry.z_j))
            if abs(candidate.d - entry.d) >= slack:
                votes += 1
        size = len(self.entries)
        is_outlier = size > 0 and votes / size > self.threshold
        if not is_outlier:
            self.entries.append(candidate)   # deque evicts the oldest at capacity
        return ScreenResult(is_outlier, votes, size)
