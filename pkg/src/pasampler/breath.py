"""Breath-rate estimation from an impedance respiration signal.

The same code path serves uniformly sampled signals and event streams: a
uniform signal is wrapped as an event stream with unit index deltas, and
all timing is derived from absolute grid indices. Only peak and valley
values plus their times are ever used, which is why the event-based
variant needs no special handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .eventsignal import Extremum, find_extrema
from .streams import EventStream, UniformSignal


class PeakDescriptor(NamedTuple):
    time: float
    delta: float
    slope: float


@dataclass(frozen=True)
class BreathConfig:
    buffer_len: int = 10
    global_time_threshold_init: float = 1.2
    batch_window: float = 5.0
    threshold_blend: float = 0.25
    median_len: int = 10

    def __post_init__(self):
        if self.buffer_len < 1:
            raise ValueError("buffer_len must be at least 1")
        if not 0 < self.threshold_blend < 1:
            raise ValueError("threshold_blend must lie in (0, 1)")
        if not self.batch_window > 0:
            raise ValueError("batch_window must be positive")
        if self.median_len < 1:
            raise ValueError("median_len must be at least 1")


@dataclass
class BrSeries:
    values: np.ndarray
    start_time: float = 0.0
    delay: float = 5.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self.values), dtype=float)


def extract_peak_descriptors(extrema: Sequence[Extremum], sample_rate: float) -> list[PeakDescriptor]:
    """Pair each peak with the valley right before it.

    Peaks with no preceding valley are skipped.
    """
    out = []
    valley = None
    for ex in extrema:
        if ex.kind == "valley":
            valley = ex
        elif ex.kind == "peak" and valley is not None:
            rise = (ex.index - valley.index) / sample_rate
            delta = ex.value - valley.value
            out.append(PeakDescriptor(ex.index / sample_rate, delta, delta / rise))
            valley = None
    return out


class Decision(NamedTuple):
    peak: PeakDescriptor
    accepted: bool
    delta_ref: float
    slope_ref: float
    previous_time: float


@dataclass
class BreathDetector:
    """Two-stage adaptive peak filter.

    Peaks passing the global delta/slope thresholds become candidates. Once
    a batch window has elapsed, candidates are kept if their delta and
    slope exceed half the batch averages and they are more than the time
    threshold after the last kept peak. The global thresholds then move by
    ``threshold_blend`` towards half the averages of the last
    ``buffer_len`` kept peaks.
    """

    config: BreathConfig = field(default_factory=BreathConfig)
    delta_threshold: float = 0.0
    slope_threshold: float = 0.0
    time_threshold: float = math.nan
    decisions: list[Decision] = field(default_factory=list)

    def __post_init__(self):
        if math.isnan(self.time_threshold):
            self.time_threshold = self.config.global_time_threshold_init

    def seed(self, descriptors: Sequence[PeakDescriptor], start_time: float = 0.0) -> None:
        """Initial thresholds at half the mean delta/slope of the first batch window."""
        if not descriptors:
            return
        first = [d for d in descriptors if d.time <= start_time + self.config.batch_window]
        first = first or [descriptors[0]]
        self.delta_threshold = 0.5 * float(np.mean([d.delta for d in first]))
        self.slope_threshold = 0.5 * float(np.mean([d.slope for d in first]))

    def _flush(self, candidates, accepted, buffer):
        delta_ref = 0.5 * float(np.mean([c.delta for c in candidates]))
        slope_ref = 0.5 * float(np.mean([c.slope for c in candidates]))
        for pc in candidates:
            prev = accepted[-1].time if accepted else -math.inf
            ok = (pc.delta > delta_ref and pc.slope > slope_ref
                  and pc.time - prev > self.time_threshold)
            self.decisions.append(Decision(pc, ok, delta_ref, slope_ref, prev))
            if ok:
                accepted.append(pc)
                buffer.append(pc)
        candidates.clear()
        if buffer:
            w = self.config.threshold_blend
            self.delta_threshold = (1 - w) * self.delta_threshold + w * 0.5 * float(np.mean([b.delta for b in buffer]))
            self.slope_threshold = (1 - w) * self.slope_threshold + w * 0.5 * float(np.mean([b.slope for b in buffer]))

    def run(self, descriptors: Sequence[PeakDescriptor], start_time: float = 0.0) -> list[PeakDescriptor]:
        candidates: list[PeakDescriptor] = []
        accepted: list[PeakDescriptor] = []
        buffer: list[PeakDescriptor] = []
        last_flush = start_time
        for p in descriptors:
            if p.delta >= self.delta_threshold and p.slope >= self.slope_threshold:
                candidates.append(p)
            if len(candidates) > 1 and p.time - last_flush >= self.config.batch_window:
                self._flush(candidates, accepted, buffer)
                last_flush = p.time
            if len(buffer) > self.config.buffer_len:
                del buffer[: len(buffer) - self.config.buffer_len]
        if candidates:
            self._flush(candidates, accepted, buffer)
        return accepted


def detect_breath_peaks(descriptors: Sequence[PeakDescriptor], config: BreathConfig | None = None,
                        start_time: float = 0.0) -> list[PeakDescriptor]:
    detector = BreathDetector(config or BreathConfig())
    detector.seed(descriptors, start_time)
    return detector.run(descriptors, start_time)


def instantaneous_br(peaks: Sequence[PeakDescriptor | float]) -> list[tuple[float, float]]:
    """Breaths per minute for each consecutive pair, stamped at the later peak."""
    times = [p.time if isinstance(p, PeakDescriptor) else float(p) for p in peaks]
    return [(t1, 60.0 / (t1 - t0)) for t0, t1 in zip(times, times[1:])]


def median_filter(values: np.ndarray, length: int = 10) -> np.ndarray:
    """Sliding median covering ``[k - length//2, k + length - length//2 - 1]``, edges held."""
    v = np.asarray(values, dtype=float)
    if not len(v):
        return v
    before = length // 2
    after = length - before - 1
    padded = np.pad(v, (before, after), mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, length)
    return np.median(windows, axis=1)


def br_postprocess(raw: Sequence[tuple[float, float]], config: BreathConfig | None = None) -> BrSeries:
    """Linear resample to whole seconds, then a centered median filter."""
    config = config or BreathConfig()
    if not len(raw):
        raise ValueError("empty breath-rate series")
    t = np.array([r[0] for r in raw], dtype=float)
    v = np.array([r[1] for r in raw], dtype=float)
    start = math.ceil(t[0])
    stop = max(math.floor(t[-1]), start)
    grid = np.arange(start, stop + 1, dtype=float)
    resampled = np.interp(grid, t, v)
    return BrSeries(median_filter(resampled, config.median_len), float(start),
                    delay=config.median_len / 2)


def breath_rate(signal: UniformSignal | EventStream, config: BreathConfig | None = None) -> BrSeries:
    """Full pipeline from signal to a 1 Hz median-filtered breath-rate series."""
    config = config or BreathConfig()
    stream = EventStream.from_uniform(signal) if isinstance(signal, UniformSignal) else signal
    if not len(stream):
        raise ValueError("empty signal")
    if stream.duration < config.batch_window:
        raise ValueError(f"need at least {config.batch_window} s of data, got {stream.duration:.3g} s")
    start_time = stream.span[0] / stream.sample_rate
    extrema = find_extrema(stream)
    descriptors = extract_peak_descriptors(extrema, stream.sample_rate)
    peaks = detect_breath_peaks(descriptors, config, start_time)
    raw = instantaneous_br(peaks)
    if not raw:
        return BrSeries(np.empty(0), start_time, delay=config.median_len / 2)
    return br_postprocess(raw, config)
