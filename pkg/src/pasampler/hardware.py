"""Bit-level functional model of the sampler circuit.

Models the port behaviour of the synthesized block one input word per
clock: fixed-width registers, a delta-index counter that forces an emission
before it overflows, and an accumulator that raises a fault flag instead of
wrapping. Timing inside the clock period is not modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .sampler import FormulaMode


@dataclass(frozen=True)
class HwConfig:
    sample_bits: int = 16
    index_bits: int = 16
    accumulator_bits: int = 32
    epsilon_register: int = 0
    sampling_f: float = 360.0
    formula_mode: FormulaMode = FormulaMode.CROSS_PRODUCT

    def __post_init__(self):
        for name in ("sample_bits", "index_bits", "accumulator_bits"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be at least 2")
        object.__setattr__(self, "formula_mode", FormulaMode(self.formula_mode))
        _check_threshold(self.epsilon_register, self.accumulator_bits)

    @property
    def sample_range(self) -> tuple[int, int]:
        half = 1 << (self.sample_bits - 1)
        return -half, half - 1

    @property
    def max_delta(self) -> int:
        return (1 << self.index_bits) - 1


def _check_threshold(epsilon: int, bits: int) -> None:
    if int(epsilon) != epsilon or not 0 <= epsilon < (1 << bits):
        raise ValueError(f"threshold {epsilon} does not fit an unsigned {bits}-bit register")


class PasPorts(NamedTuple):
    output_sample: int
    output_index: int
    output_valid: bool
    sampling_f: float


class PasCircuit:
    """Register-level state of one sampler block.

    After any step with ``fault`` set the event decisions are no longer
    guaranteed to match the unbounded-arithmetic sampler.
    """

    def __init__(self, config: HwConfig | None = None):
        self.config = config or HwConfig()
        self._cross = self.config.formula_mode is FormulaMode.CROSS_PRODUCT
        self._lo, self._hi = self.config.sample_range
        acc_half = 1 << (self.config.accumulator_bits - 1)
        self._acc_lo, self._acc_hi = -acc_half, acc_half - 1
        self._max_delta = self.config.max_delta
        self.epsilon = int(self.config.epsilon_register)
        self.f = self.x = self.y = self.p = self.L = 0
        self.i = 0
        self.counter = 0
        self.prev_sample = 0
        self._p_value = 0
        self.fault = False
        self.saturation_events = 0
        self.forced_emissions = 0

    def write_threshold(self, epsilon: int) -> None:
        """Load a new threshold; used from the next step on."""
        _check_threshold(epsilon, self.config.accumulator_bits)
        self.epsilon = int(epsilon)

    def _ports(self, value: int, delta: int) -> PasPorts:
        return PasPorts(value, delta, True, self.config.sampling_f)

    def _idle(self) -> PasPorts:
        return PasPorts(0, 0, False, self.config.sampling_f)

    def hw_step(self, adc_word: int) -> PasPorts:
        word = int(adc_word)
        if word != adc_word or not self._lo <= word <= self._hi:
            raise ValueError(f"ADC word {adc_word} outside {self.config.sample_bits}-bit range")
        i = self.i
        self.i = i + 1
        if i == 0:
            self.prev_sample = word
            return self._ports(word, 0)

        dy = word - self.prev_sample
        self.x += 1
        self.y += dy
        if self._cross:
            f = self.f + self.x * dy - self.y
        else:
            f = self.f + self.x - self.y * dy
        if f > self._acc_hi or f < self._acc_lo:
            self.fault = True
            self.saturation_events += 1
            f = min(max(f, self._acc_lo), self._acc_hi)
        self.f = f
        ln = abs(self.y) + self.x
        if ln < self.L and self.p == 0:
            self.p = i - 1
            self._p_value = self.prev_sample
        self.L = ln
        self.counter += 1

        out = self._idle()
        if abs(self.f) > self.epsilon:
            if self.p == 0:
                back, value = 1, self.prev_sample
            else:
                back, value = i - self.p, self._p_value
            delta = self.counter - back
            # delta 0 re-selects the anchor; state still resets
            if delta:
                out = self._ports(value, delta)
            self.counter = back
            self.f = self.p = 0
            self.x = back
            self.y = word - value
            self.L = abs(self.y) + self.x
        elif self.counter >= self._max_delta:
            out = self._ports(word, self.counter)
            self.forced_emissions += 1
            self.counter = 0
            self.f = self.x = self.y = self.p = self.L = 0

        self.prev_sample = word
        return out


class TraceRow(NamedTuple):
    step: int
    valid: bool
    sample: int
    index: int


def run_trace(words: Iterable[int], config: HwConfig | None = None,
              thresholds: dict[int, int] | None = None) -> tuple[list[TraceRow], PasCircuit]:
    """Clock ``words`` through a fresh circuit, one word per step.

    ``thresholds`` maps step number to a register write performed just
    before that step.
    """
    circuit = PasCircuit(config)
    thresholds = thresholds or {}
    rows = []
    for k, w in enumerate(words):
        if k in thresholds:
            circuit.write_threshold(thresholds[k])
        ports = circuit.hw_step(w)
        rows.append(TraceRow(k, ports.output_valid, ports.output_sample, ports.output_index))
    return rows, circuit


def trace_events(rows: Iterable[TraceRow]) -> list[tuple[int, int]]:
    """(value, delta_index) of every valid strobe in a port trace."""
    return [(r.sample, r.index) for r in rows if r.valid]


def _round_half_away(q: float) -> int:
    return int(math.copysign(math.floor(abs(q) + 0.5), q))


def quantize(value: float, full_scale: float, sample_bits: int = 16) -> int:
    """Map ``value`` in ``[-full_scale, full_scale]`` to a signed word.

    ``full_scale`` maps to ``2**(bits-1)`` before saturation, so it lands on
    the top code; rounding is half away from zero.
    """
    if not full_scale > 0:
        raise ValueError("full_scale must be positive")
    half = 1 << (sample_bits - 1)
    word = _round_half_away(value / full_scale * half)
    return min(max(word, -half), half - 1)


class Adc:
    """Array front end for :func:`quantize` that counts clipped samples."""

    def __init__(self, full_scale: float, sample_bits: int = 16):
        if not full_scale > 0:
            raise ValueError("full_scale must be positive")
        self.full_scale = full_scale
        self.sample_bits = sample_bits
        self.clip_count = 0

    def convert(self, values) -> np.ndarray:
        half = 1 << (self.sample_bits - 1)
        out = np.empty(len(values), dtype=np.int64)
        for k, v in enumerate(np.asarray(values, dtype=float).tolist()):
            q = _round_half_away(v / self.full_scale * half)
            if q > half - 1 or q < -half:
                self.clip_count += 1
            out[k] = min(max(q, -half), half - 1)
        return out
