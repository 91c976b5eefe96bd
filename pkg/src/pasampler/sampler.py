"""Streaming polygonal-approximation sampler.

The sampler consumes one uniformly sampled value per :meth:`Sampler.step`
and emits an :class:`~pasampler.streams.EventSample` whenever the running
area-deviation functional of the current segment exceeds ``epsilon``.
Arithmetic is whatever the inputs give it: Python ints stay exact, floats
stay IEEE doubles.

The emitted breakpoint is either the previous sample or the first point
where the segment pseudo-length ``|y| + x`` shrank, so besides the five
running variables the sampler only retains two amplitudes (the previous
sample and the one at the corner candidate).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .streams import EventSample, EventStream, UniformSignal


class FormulaMode(enum.Enum):
    """Which accumulator update to use.

    ``CROSS_PRODUCT`` adds ``x*dy - y*dx`` (twice the signed area between
    chord and curve, zero on straight lines). ``PAPER_VERBATIM`` adds
    ``x*dx - y*dy``, which stays zero only on lines of slope +1 or -1.
    """

    CROSS_PRODUCT = "cross"
    PAPER_VERBATIM = "verbatim"


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float = 0.0
    formula_mode: FormulaMode = FormulaMode.CROSS_PRODUCT
    emit_first: bool = True
    emit_last_on_flush: bool = True

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        object.__setattr__(self, "formula_mode", FormulaMode(self.formula_mode))


class Sampler:
    """One sampler instance; feed it samples in time order from a single producer."""

    def __init__(self, config: SamplerConfig | None = None):
        self.config = config or SamplerConfig()
        self._cross = self.config.formula_mode is FormulaMode.CROSS_PRODUCT
        self.f = 0
        self.x = 0
        self.y = 0
        self.p = 0
        self.L = 0
        self.i = 1
        self.last_emitted_index = 0
        self.prev_sample = None
        self._p_value = None
        self._n_seen = 0
        self._last_is_emitted = False
        self._any_emitted = False
        self._flushed = False

    @property
    def epsilon(self) -> float:
        return self.config.epsilon

    @property
    def samples_seen(self) -> int:
        return self._n_seen

    def step(self, sample) -> EventSample | None:
        if self._flushed:
            raise RuntimeError("sampler already flushed")
        if self._n_seen == 0:
            self._n_seen = 1
            self.prev_sample = sample
            if self.config.emit_first:
                self._last_is_emitted = self._any_emitted = True
                return EventSample(sample, 0)
            return None

        i = self.i
        dy = sample - self.prev_sample
        self.x += 1
        self.y += dy
        if self._cross:
            self.f += self.x * dy - self.y
        else:
            self.f += self.x - self.y * dy
        ln = abs(self.y) + self.x
        if ln < self.L and self.p == 0:
            self.p = i - 1
            self._p_value = self.prev_sample
        self.L = ln

        event = None
        self._last_is_emitted = False
        if abs(self.f) > self.config.epsilon:
            if self.p == 0:
                t, value = i - 1, self.prev_sample
            else:
                t, value = self.p, self._p_value
            if not (t == self.last_emitted_index and self._any_emitted):
                event = EventSample(value, t - self.last_emitted_index)
                self._any_emitted = True
            self.last_emitted_index = t
            self.f = 0
            self.p = 0
            self._p_value = None
            self.x = i - t
            self.y = sample - value
            self.L = abs(self.y) + self.x

        self.prev_sample = sample
        self.i = i + 1
        self._n_seen += 1
        return event

    def flush(self) -> EventSample | None:
        """Emit the final input sample if it is not already an event."""
        if self._flushed or self._n_seen == 0:
            self._flushed = True
            return None
        self._flushed = True
        if not self.config.emit_last_on_flush or self._last_is_emitted:
            return None
        last = self.i - 1
        event = EventSample(self.prev_sample, last - self.last_emitted_index)
        self.last_emitted_index = last
        self._last_is_emitted = True
        return event


def new_sampler(config: SamplerConfig | None = None) -> Sampler:
    return Sampler(config)


def _as_list(signal) -> list:
    samples = signal.samples if isinstance(signal, UniformSignal) else signal
    if hasattr(samples, "tolist"):
        return samples.tolist()
    return list(samples)


def sample_batch(signal: UniformSignal, config: SamplerConfig | None = None) -> EventStream:
    """Run a whole signal through a fresh sampler, flush included."""
    config = config or SamplerConfig()
    samples = _as_list(signal)
    if not samples:
        raise ValueError("cannot sample an empty signal")
    sampler = Sampler(config)
    step = sampler.step
    events = [ev for ev in map(step, samples) if ev is not None]
    last = sampler.flush()
    if last is not None:
        events.append(last)
    return EventStream(tuple(events), signal.sample_rate, config.epsilon)


class TraceRow(NamedTuple):
    index: int
    f: float
    x: int
    y: float
    p: int
    L: float
    f_entry: float
    f_accumulated: float
    emitted: int | None


def compute_f_trace(signal: UniformSignal | Sequence, config: SamplerConfig | None = None) -> list[TraceRow]:
    """Replay the loop line by line over the full sample array.

    One row per loop iteration (input indices 1..n-1). ``f_entry`` is ``f``
    when the iteration starts, ``f_accumulated`` is ``f`` just before the
    threshold test, ``emitted`` is the absolute index output that step.
    Works on the whole array instead of the two retained amplitudes, so it
    also serves as a reference for :class:`Sampler`.
    """
    config = config or SamplerConfig()
    sample = _as_list(signal)
    if not sample:
        raise ValueError("cannot trace an empty signal")
    eps = config.epsilon
    cross = config.formula_mode is FormulaMode.CROSS_PRODUCT
    dx = 1
    f = x = y = p = L = 0
    rows = []
    for i in range(1, len(sample)):
        f_entry = f
        dy = sample[i] - sample[i - 1]
        x = x + dx
        y = y + dy
        if cross:
            f = f + x * dy - y * dx
        else:
            f = f + x * dx - y * dy
        ln = abs(y) + x
        if ln < L and p == 0:
            p = i - 1
        L = ln
        f_acc = f
        emitted = None
        if abs(f) > eps:
            t = i - 1 if p == 0 else p
            emitted = t
            f = p = 0
            x = (i - t) * dx
            y = sample[i] - sample[t]
            L = abs(y) + x
        rows.append(TraceRow(i, f, x, y, p, L, f_entry, f_acc, emitted))
    return rows
