"""Deterministic synthetic signals for tests, demos and sweeps."""

from __future__ import annotations

import math

import numpy as np

from .streams import UniformSignal

KINDS = ("constant", "ramp", "sine", "triangle", "synthetic_ecg", "synthetic_respiration", "random_walk")


def _n_samples(params: dict, rate: float) -> int:
    if "n" in params:
        n = int(params["n"])
    elif "duration" in params:
        n = int(round(float(params["duration"]) * rate))
    else:
        raise ValueError("need either n or duration")
    if n < 1:
        raise ValueError("fixture must have at least one sample")
    return n


def respiration_with_truth(duration: float = 480.0, rate: float = 125.0, bpm: float = 15.0,
                           amplitude: float = 1.0, period_jitter: float = 0.1,
                           amplitude_jitter: float = 0.2, noise: float = 0.0,
                           seed: int = 0) -> tuple[UniformSignal, np.ndarray]:
    """Breathing-like signal and the exact times of its inhalation peaks.

    Each cycle is a raised-cosine bump ``A_k (1 - cos) / 2`` of period
    ``T_k``; cycle periods and heights are drawn independently around the
    nominal values, so the waveform stays continuous at cycle boundaries.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    base_period = 60.0 / bpm
    out = np.zeros(n)
    peaks = []
    start = 0.0
    while start < duration:
        period = base_period * (1 + period_jitter * rng.uniform(-1, 1))
        height = amplitude * (1 + amplitude_jitter * rng.uniform(-1, 1))
        sel = (t >= start) & (t < start + period)
        phase = (t[sel] - start) / period
        out[sel] = height * 0.5 * (1 - np.cos(2 * np.pi * phase))
        peak = start + period / 2
        if peak < t[-1]:
            peaks.append(peak)
        start += period
    out -= 0.5 * amplitude
    if noise:
        out += rng.normal(0.0, noise, n)
    return UniformSignal(out, rate), np.array(peaks)


def ecg_with_truth(duration: float = 20.0, rate: float = 360.0, heart_rate: float = 72.0,
                   rr_jitter: float = 0.05, amplitude: float = 1.0, noise: float = 0.0,
                   seed: int = 0) -> tuple[UniformSignal, np.ndarray]:
    """Repeating P-QRS-T template built from Gaussian bumps, plus R-peak times."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    # (offset from R peak in s, width in s, relative height)
    waves = ((-0.20, 0.025, 0.12), (-0.04, 0.010, -0.15), (0.0, 0.012, 1.0),
             (0.04, 0.010, -0.25), (0.25, 0.040, 0.30))
    rr = 60.0 / heart_rate
    out = np.zeros(n)
    r_peaks = []
    r = 0.3
    while r < duration:
        for off, width, h in waves:
            out += amplitude * h * np.exp(-0.5 * ((t - r - off) / width) ** 2)
        r_peaks.append(r)
        r += rr * (1 + rr_jitter * rng.uniform(-1, 1))
    if noise:
        out += rng.normal(0.0, noise, n)
    return UniformSignal(out, rate), np.array(r_peaks)


def gen_fixture(kind: str, params: dict | None = None, seed: int = 0) -> UniformSignal:
    """Generate a named synthetic signal.

    Common parameters are ``rate`` (Hz, default 360) and either ``n`` or
    ``duration``. Per kind:

    * constant: ``value``
    * ramp: ``slope`` per sample, ``offset``
    * sine: ``freq`` Hz, ``amplitude``, ``phase`` rad, ``offset``
    * triangle: ``period`` samples, ``amplitude``
    * synthetic_ecg: ``heart_rate`` BPM, ``rr_jitter``, ``amplitude``, ``noise``
    * synthetic_respiration: ``bpm``, ``period_jitter``, ``amplitude_jitter``, ``amplitude``, ``noise``
    * random_walk: ``step`` maximum integer increment, ``start``
    """
    params = dict(params or {})
    if kind not in KINDS:
        raise ValueError(f"unknown fixture kind {kind!r}; expected one of {', '.join(KINDS)}")
    rate = float(params.get("rate", 360.0))
    if not rate > 0:
        raise ValueError("rate must be positive")

    if kind == "synthetic_respiration":
        duration = float(params.get("duration", _n_samples(params, rate) / rate))
        sig, _ = respiration_with_truth(
            duration, rate, float(params.get("bpm", 15.0)), float(params.get("amplitude", 1.0)),
            float(params.get("period_jitter", 0.1)), float(params.get("amplitude_jitter", 0.2)),
            float(params.get("noise", 0.0)), seed)
        return sig
    if kind == "synthetic_ecg":
        duration = float(params.get("duration", _n_samples(params, rate) / rate))
        sig, _ = ecg_with_truth(
            duration, rate, float(params.get("heart_rate", 72.0)), float(params.get("rr_jitter", 0.05)),
            float(params.get("amplitude", 1.0)), float(params.get("noise", 0.0)), seed)
        return sig

    n = _n_samples(params, rate)
    k = np.arange(n)
    if kind == "constant":
        out = np.full(n, params.get("value", 0.0))
    elif kind == "ramp":
        out = params.get("offset", 0) + params.get("slope", 1) * k
    elif kind == "sine":
        freq = float(params.get("freq", 1.0))
        out = (float(params.get("offset", 0.0)) + float(params.get("amplitude", 1.0))
               * np.sin(2 * math.pi * freq * k / rate + float(params.get("phase", 0.0))))
    elif kind == "triangle":
        period = int(params.get("period", 6))
        if period < 2 or period % 2:
            raise ValueError("triangle period must be an even number of samples >= 2")
        half = period // 2
        amp = params.get("amplitude", half)
        ph = k % period
        out = amp * np.where(ph <= half, ph, period - ph) / half
    else:  # random_walk
        step = int(params.get("step", 3))
        if step < 1:
            raise ValueError("random_walk step must be >= 1")
        rng = np.random.default_rng(seed)
        inc = rng.integers(-step, step + 1, n)
        inc[0] = 0
        out = int(params.get("start", 0)) + np.cumsum(inc)
    return UniformSignal(np.asarray(out), rate)
