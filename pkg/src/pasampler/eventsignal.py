"""Processing routines that work directly on piecewise-linear event streams.

Between two consecutive events the signal is taken to be the straight line
joining them, so every routine here is exact for that model: nothing is
resampled unless the operation needs a value that falls between events.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .streams import EventStream, UniformSignal


def reconstruct(stream: EventStream, positions) -> np.ndarray:
    """Vectorized :func:`reconstruct_at` over an array of grid positions."""
    if not len(stream):
        raise ValueError("empty stream")
    idx = stream.indices
    vals = stream.values
    q = np.asarray(positions, dtype=float)
    if q.size and (q.min() < idx[0] or q.max() > idx[-1]):
        raise ValueError(f"positions outside covered span [{idx[0]}, {idx[-1]}]")
    if len(idx) == 1:
        return np.full(q.shape, vals[0])
    # segment k runs from event k to event k+1
    seg = np.clip(np.searchsorted(idx, q, side="right") - 1, 0, len(idx) - 2)
    i0 = idx[seg]
    i1 = idx[seg + 1]
    v0 = vals[seg]
    v1 = vals[seg + 1]
    out = v0 + (v1 - v0) * (q - i0) / (i1 - i0)
    hit = np.searchsorted(idx, q)
    hit = np.minimum(hit, len(idx) - 1)
    exact = idx[hit] == q
    out[exact] = vals[hit[exact]]
    return out


def reconstruct_at(stream: EventStream, index: float) -> float:
    return float(reconstruct(stream, np.array([index]))[0])


def resample_uniform(stream: EventStream, target_rate: float) -> UniformSignal:
    """Linear reconstruction on a uniform grid starting at the first event."""
    if not len(stream):
        raise ValueError("empty stream")
    if not target_rate > 0:
        raise ValueError("target_rate must be positive")
    first, last = stream.span
    if target_rate == stream.sample_rate:
        positions = np.arange(first, last + 1, dtype=float)
    else:
        step = stream.sample_rate / target_rate
        n = int(math.floor((last - first) / step + 1e-9)) + 1
        positions = first + np.arange(n) * step
        positions[-1] = min(positions[-1], last)
    return UniformSignal(reconstruct(stream, positions), target_rate)


def fir_filter_events(stream: EventStream, coefficients: Sequence[float],
                      stats: dict | None = None) -> EventStream:
    """Apply an FIR filter at event positions only.

    Output at event index ``k`` is ``sum_j c[j] * s(k - j)`` where ``s`` is the
    piecewise-linear signal. Neighbours before the first event take the
    first event's value. If ``stats`` is given, the number of interpolated
    neighbour values is stored under ``"interpolations"``.
    """
    c = np.asarray(coefficients, dtype=float)
    if c.ndim != 1 or not len(c):
        raise ValueError("need at least one coefficient")
    if not len(stream):
        raise ValueError("empty stream")
    idx = stream.indices
    vals = stream.values
    taps = np.arange(len(c))
    pos = idx[:, None] - taps[None, :]
    before = pos < idx[0]
    hit = np.searchsorted(idx, pos)
    on_event = ~before & (idx[np.minimum(hit, len(idx) - 1)] == pos)
    need = ~before & ~on_event

    x = np.empty(pos.shape, dtype=float)
    x[before] = vals[0]
    x[on_event] = vals[hit[on_event]]
    if need.any():
        q = pos[need]
        k = hit[need]
        i0, i1 = idx[k - 1], idx[k]
        v0, v1 = vals[k - 1], vals[k]
        x[need] = v0 + (v1 - v0) * (q - i0) / (i1 - i0)
    if stats is not None:
        stats["interpolations"] = int(need.sum())
    return stream.with_values(x @ c)


class Features(NamedTuple):
    mean: float
    std: float
    min: float
    max: float


def window_features(stream: EventStream, window: tuple[float, float]) -> Features:
    """Mean, population std, min and max of the linear interpolant over a window.

    Integrals are evaluated segment by segment in closed form, so the result
    is exact for the piecewise-linear model.
    """
    t0, t1 = float(window[0]), float(window[1])
    if not t1 > t0:
        raise ValueError("window must have t_end > t_start")
    idx = stream.indices
    inner = idx[(idx > t0) & (idx < t1)]
    xs = np.concatenate(([t0], inner.astype(float), [t1]))
    vs = reconstruct(stream, xs)
    h = np.diff(xs)
    a, b = vs[:-1], vs[1:]
    length = t1 - t0
    mean = float(np.sum(h * (a + b)) / (2 * length))
    da, db = a - mean, b - mean
    var = float(np.sum(h * (da * da + da * db + db * db)) / (3 * length))
    return Features(mean, math.sqrt(max(var, 0.0)), float(vs.min()), float(vs.max()))


class Extremum(NamedTuple):
    index: int
    value: float
    kind: str


def find_extrema(stream: EventStream) -> list[Extremum]:
    """Local peaks and valleys of the event value sequence.

    A run of equal values counts once, at its first event. The first and last
    runs are never extrema.
    """
    vals = stream.values
    if len(vals) < 3:
        return []
    idx = stream.indices
    # run starts: positions where the value changes
    change = np.flatnonzero(np.diff(vals) != 0) + 1
    starts = np.concatenate(([0], change))
    rv = vals[starts]
    out = []
    for k in range(1, len(starts) - 1):
        left, mid, right = rv[k - 1], rv[k], rv[k + 1]
        if mid > left and mid > right:
            kind = "peak"
        elif mid < left and mid < right:
            kind = "valley"
        else:
            continue
        s = starts[k]
        out.append(Extremum(int(idx[s]), float(mid), kind))
    return out
