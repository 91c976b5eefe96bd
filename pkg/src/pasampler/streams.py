"""Signal containers shared by every module.

A :class:`UniformSignal` is what an ADC produces: a value per sample period.
An :class:`EventStream` is what the sampler produces: a sparse list of
``(value, delta_index)`` pairs on the same uniform time base, where
``delta_index`` counts sample periods since the previous event.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class EventSample(NamedTuple):
    value: float
    delta_index: int


@dataclass(frozen=True)
class UniformSignal:
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        """Length in seconds, counting one period per sample."""
        return len(self.samples) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate


@dataclass(frozen=True, eq=False)
class EventStream:
    events: tuple[EventSample, ...]
    sample_rate: float
    epsilon_used: float | None = None
    _indices: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        events = tuple(EventSample(v, int(d)) for v, d in self.events)
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if events and events[0].delta_index < 0:
            raise ValueError("first event has a negative index")
        for k, ev in enumerate(events[1:], start=1):
            if ev.delta_index < 1:
                raise ValueError(f"event {k} has delta_index {ev.delta_index} < 1")
        object.__setattr__(self, "events", events)
        idx = np.cumsum([ev.delta_index for ev in events], dtype=np.int64)
        idx.setflags(write=False)
        object.__setattr__(self, "_indices", idx)

    @classmethod
    def from_indices(
        cls,
        indices: Iterable[int],
        values: Iterable[float],
        sample_rate: float,
        epsilon_used: float | None = None,
    ) -> EventStream:
        """Build a stream from absolute uniform-grid indices."""
        events = []
        last = 0
        for k, (i, v) in enumerate(zip(indices, values)):
            i = int(i)
            events.append(EventSample(v, i if k == 0 else i - last))
            last = i
        return cls(tuple(events), sample_rate, epsilon_used)

    @classmethod
    def from_uniform(cls, signal: UniformSignal) -> EventStream:
        """Every sample becomes an event; lets uniform data share event-domain code."""
        n = len(signal)
        return cls.from_indices(range(n), signal.samples.tolist(), signal.sample_rate)

    def __len__(self) -> int:
        return len(self.events)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.events == other.events
            and self.sample_rate == other.sample_rate
            and self.epsilon_used == other.epsilon_used
        )

    __hash__ = None

    @property
    def indices(self) -> np.ndarray:
        """Absolute uniform-grid index of each event."""
        return self._indices

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([ev.value for ev in self.events], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self._indices / self.sample_rate

    @property
    def span(self) -> tuple[int, int]:
        if not self.events:
            raise ValueError("empty stream has no span")
        return int(self._indices[0]), int(self._indices[-1])

    @property
    def duration(self) -> float:
        """Seconds covered by the stream, counting one period per grid point."""
        if not self.events:
            return 0.0
        first, last = self.span
        return (last - first + 1) / self.sample_rate

    def with_values(self, values: Sequence[float]) -> EventStream:
        """Same event positions, new amplitudes."""
        if len(values) != len(self.events):
            raise ValueError("value count does not match event count")
        events = tuple(EventSample(float(v), ev.delta_index) for v, ev in zip(values, self.events))
        return EventStream(events, self.sample_rate, self.epsilon_used)
