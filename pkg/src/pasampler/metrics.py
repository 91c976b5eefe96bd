"""Evaluation metrics: sampling reduction, RMSE and event matching."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .streams import UniformSignal


def srf(n_events: int, duration: float, uniform_rate: float) -> float:
    """Sampling reduction factor, ``1 - event_rate / uniform_rate``.

    Negative when there are more events than uniform samples; a warning is
    emitted in that case.
    """
    if not duration > 0 or not uniform_rate > 0:
        raise ValueError("duration and uniform_rate must be positive")
    value = 1.0 - (n_events / duration) / uniform_rate
    if value < 0:
        warnings.warn(f"event rate exceeds uniform rate (SRF {value:.4f})", stacklevel=2)
    return value


def rmse(a, b) -> float:
    """Root mean square error over the overlap of two series.

    ``BrSeries`` pairs are aligned on their shared 1 Hz time grid, which
    requires their start times to differ by a whole number of seconds.
    Uniform signals must share a sample rate and are aligned at sample 0.
    """
    from .breath import BrSeries

    if isinstance(a, BrSeries) and isinstance(b, BrSeries):
        offset = b.start_time - a.start_time
        shift = int(round(offset))
        if abs(offset - shift) > 1e-9:
            raise ValueError("BR series grids are not aligned to whole seconds")
        va, vb = np.asarray(a.values, float), np.asarray(b.values, float)
        lo = max(0, shift)
        hi = min(len(va), shift + len(vb))
        x = va[lo:hi]
        y = vb[lo - shift:hi - shift]
    elif isinstance(a, UniformSignal) and isinstance(b, UniformSignal):
        if a.sample_rate != b.sample_rate:
            raise ValueError("uniform signals have different sample rates")
        n = min(len(a), len(b))
        x = np.asarray(a.samples[:n], float)
        y = np.asarray(b.samples[:n], float)
    else:
        x = np.asarray(a, float)
        y = np.asarray(b, float)
        if x.shape != y.shape:
            raise ValueError("plain arrays must have equal shape")
    if not len(x):
        raise ValueError("series do not overlap")
    return float(np.sqrt(np.mean((x - y) ** 2)))


@dataclass
class MatchResult:
    true_positives: int
    false_positives: int
    false_negatives: int
    matched_pairs: list[tuple[float, float]] = field(default_factory=list)

    @property
    def precision(self) -> float:
        n = self.true_positives + self.false_positives
        return self.true_positives / n if n else math.nan

    @property
    def recall(self) -> float:
        n = self.true_positives + self.false_negatives
        return self.true_positives / n if n else math.nan

    @property
    def f1(self) -> float:
        return f1(self.true_positives, self.false_positives, self.false_negatives)


def match_events(pred: Sequence[float], truth: Sequence[float], tolerance: float = 0.150) -> MatchResult:
    """One-to-one matching of sorted event times within ``±tolerance`` seconds.

    A single forward sweep pairs the earliest unmatched prediction with the
    earliest unmatched label it can reach. Because every tolerance window
    has the same width this order-preserving greedy pass attains the
    maximum possible number of matches.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    p = list(pred)
    t = list(truth)
    if any(p[k] > p[k + 1] for k in range(len(p) - 1)) or any(t[k] > t[k + 1] for k in range(len(t) - 1)):
        raise ValueError("event times must be sorted")
    i = j = 0
    pairs = []
    while i < len(p) and j < len(t):
        d = t[j] - p[i]
        if d < -tolerance:
            j += 1
        elif d > tolerance:
            i += 1
        else:
            pairs.append((p[i], t[j]))
            i += 1
            j += 1
    tp = len(pairs)
    return MatchResult(tp, len(p) - tp, len(t) - tp, pairs)


def f1(tp: int, fp: int, fn: int) -> float:
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    if tp + fp + fn == 0:
        raise ValueError("F1 undefined when all counts are zero")
    return 2 * tp / (2 * tp + fp + fn)
