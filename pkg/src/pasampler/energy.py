"""System-level energy bookkeeping for a sampler in front of an MCU.

Everything is in SI units (J, W, s, Hz). The MCU processing energy per
window is modeled as an affine function of the average event frequency,
fitted through two measured points; that affine form is an assumption of
this model.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple


@dataclass(frozen=True)
class AffineModel:
    """``energy(f) = intercept + slope * f`` in joules per window."""

    slope: float
    intercept: float

    def __call__(self, freq: float) -> float:
        return self.intercept + self.slope * freq

    def inverse(self, energy: float) -> float:
        if self.slope == 0:
            raise ValueError("constant model has no inverse")
        return (energy - self.intercept) / self.slope


def fit_affine_mcu_model(point_lo: tuple[float, float], point_hi: tuple[float, float]) -> AffineModel:
    (f0, e0), (f1, e1) = point_lo, point_hi
    if f0 == f1:
        raise ValueError("fit points need distinct frequencies")
    slope = (e1 - e0) / (f1 - f0)
    return AffineModel(slope, e0 - slope * f0)


@dataclass(frozen=True)
class EnergyParams:
    pas_dynamic_power: float = 1.242e-6
    pas_leakage_power: float = 0.428e-6
    per_sample_active_time: float = 7.09e-9
    window_duration: float = 20.0
    uniform_rate: float = 360.0
    mcu_model: AffineModel = AffineModel(0.0, 0.0)
    uniform_algo_energy: float = 0.0

    def __post_init__(self):
        for name in ("pas_dynamic_power", "pas_leakage_power", "per_sample_active_time",
                     "window_duration", "uniform_rate", "uniform_algo_energy"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.mcu_model.slope < 0:
            raise ValueError("MCU energy model slope must be non-negative")

    def with_(self, **changes) -> EnergyParams:
        return replace(self, **changes)


class WindowEnergy(NamedTuple):
    active: float
    leakage: float
    total: float


def pas_window_energy(params: EnergyParams) -> WindowEnergy:
    """Sampler energy over one acquisition window."""
    n_samples = params.uniform_rate * params.window_duration
    active = params.pas_dynamic_power * params.per_sample_active_time * n_samples
    leakage = params.pas_leakage_power * params.window_duration
    return WindowEnergy(active, leakage, active + leakage)


def event_system_energy(params: EnergyParams, freq: float) -> float:
    return params.mcu_model(freq) + pas_window_energy(params).total


def crossover_frequency(params: EnergyParams) -> float:
    """Average event frequency at which event-based processing costs the same as uniform."""
    if params.mcu_model.slope == 0:
        raise ValueError("no crossover for a frequency-independent MCU model")
    target = params.uniform_algo_energy - pas_window_energy(params).total
    freq = params.mcu_model.inverse(target)
    if not 0 <= freq <= params.uniform_rate * (1 + 1e-12):
        raise ValueError(f"no crossover in [0, {params.uniform_rate}] Hz (solution {freq:.6g} Hz)")
    return freq


def savings_at(params: EnergyParams, working_freq: float) -> float:
    if working_freq < 0:
        raise ValueError("working frequency must be non-negative")
    if params.uniform_algo_energy == 0:
        raise ValueError("uniform_algo_energy is zero")
    return 1.0 - event_system_energy(params, working_freq) / params.uniform_algo_energy


def calibrate_uniform_energy(params: EnergyParams, working_freq: float, savings: float) -> float:
    """Uniform-pipeline energy that makes ``savings_at(working_freq) == savings``."""
    if not savings < 1:
        raise ValueError("savings must be below 1")
    return event_system_energy(params, working_freq) / (1.0 - savings)


# Reference MCU operating points, in joules per 20 s window.
MCU_POINT_LO = (10.0, 143e-6)
MCU_POINT_HI = (360.0, 379e-6)
HVT_LEAKAGE_POWER = 0.035e-6


def reference_params(leakage_power: float = 0.428e-6, working_freq: float = 17.1,
                     savings: float = 0.446) -> EnergyParams:
    """Regular-Vt parameters with the uniform energy calibrated at the working point.

    Calibration always uses the regular-Vt leakage so that swapping in
    ``leakage_power`` afterwards changes only the sampler's share.
    """
    base = EnergyParams(mcu_model=fit_affine_mcu_model(MCU_POINT_LO, MCU_POINT_HI))
    uniform = calibrate_uniform_energy(base, working_freq, savings)
    return base.with_(uniform_algo_energy=uniform, pas_leakage_power=leakage_power)
