"""Event-based sampling by polygonal approximation, and tools around it."""

from .streams import EventSample, EventStream, UniformSignal
from .sampler import FormulaMode, Sampler, SamplerConfig, compute_f_trace, new_sampler, sample_batch
from .hardware import HwConfig, PasCircuit, PasPorts, quantize
from .eventsignal import (find_extrema, fir_filter_events, reconstruct, reconstruct_at,
                          resample_uniform, window_features)
from .breath import BreathConfig, BrSeries, breath_rate
from .metrics import MatchResult, f1, match_events, rmse, srf

__version__ = "0.1.0"

__all__ = [
    "EventSample", "EventStream", "UniformSignal",
    "FormulaMode", "Sampler", "SamplerConfig", "compute_f_trace", "new_sampler", "sample_batch",
    "HwConfig", "PasCircuit", "PasPorts", "quantize",
    "find_extrema", "fir_filter_events", "reconstruct", "reconstruct_at", "resample_uniform",
    "window_features",
    "BreathConfig", "BrSeries", "breath_rate",
    "MatchResult", "f1", "match_events", "rmse", "srf",
]
