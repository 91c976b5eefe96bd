"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error. Failures print a JSON
object ``{"error": kind, "message": ...}`` on stderr and remove any output
file the command had started writing.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import energy as en
from .breath import BreathConfig, breath_rate
from .eventsignal import find_extrema, resample_uniform
from .fileio import (DataError, fmt, parse_quantity, read_csv, read_events, read_kv,
                     write_csv, write_events, write_table)
from .fixtures import KINDS, gen_fixture
from .hardware import Adc, HwConfig, run_trace
from .metrics import match_events, rmse, srf
from .sampler import FormulaMode, SamplerConfig, sample_batch
from .streams import UniformSignal

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
SWEEP_METRICS = ("event_count", "srf", "rmse_reconstruction", "f1_vs_annotations")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _mode(text: str) -> FormulaMode:
    try:
        return FormulaMode(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mode must be 'cross' or 'verbatim', got {text!r}") from None


def _load_channel(path, rate, column) -> UniformSignal:
    channels = read_csv(path, rate)
    if not 0 <= column < len(channels):
        raise DataError(f"{path}: column {column} out of range ({len(channels)} value columns)")
    return channels[column]


def _epsilon(args, signal: UniformSignal) -> float:
    if args.epsilon_frac is not None:
        s = signal.samples
        return float(args.epsilon_frac) * float(np.max(s) - np.min(s))
    return args.epsilon


def _sampler_config(epsilon, mode) -> SamplerConfig:
    try:
        return SamplerConfig(epsilon=epsilon, formula_mode=mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_sample(args, out) -> None:
    signal = _load_channel(args.input, args.rate, args.column)
    stream = sample_batch(signal, _sampler_config(_epsilon(args, signal), args.mode))
    write_events(out(args.output), stream)
    value = srf(len(stream), signal.duration, signal.sample_rate)
    print(f"events={len(stream)} samples={len(signal)} srf={fmt(value)}")


def cmd_reconstruct(args, out) -> None:
    stream = read_events(args.input)
    rate = args.rate or stream.sample_rate
    signal = resample_uniform(stream, rate)
    start = stream.span[0] if rate == stream.sample_rate else 0
    write_csv(out(args.output), signal, start_index=start)


@dataclass
class SweepSpec:
    thresholds: list[float]
    metrics: list[str]
    input: Path
    output: Path
    rate: float | None = None
    column: int = 0
    mode: FormulaMode = FormulaMode.CROSS_PRODUCT
    annotations: Path | None = None
    tolerance: float = 0.150
    peak_height: float | None = None
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.thresholds:
            raise UsageError("sweep needs at least one threshold")
        if any(not t >= 0 for t in self.thresholds):
            raise UsageError("sweep thresholds must be non-negative")
        unknown = [m for m in self.metrics if m not in SWEEP_METRICS]
        if unknown:
            raise UsageError(f"unknown sweep metrics: {', '.join(unknown)}")
        if "f1_vs_annotations" in self.metrics and self.annotations is None:
            raise UsageError("f1_vs_annotations needs an annotations file")

    @classmethod
    def from_kv(cls, kv: dict[str, str], base: Path = Path(".")) -> SweepSpec:
        def path(key):
            return base / kv[key] if key in kv else None

        try:
            return cls(
                thresholds=[float(t) for t in kv["thresholds"].split(",") if t.strip()],
                metrics=[m.strip() for m in kv.get("metrics", "event_count,srf").split(",") if m.strip()],
                input=path("input"),
                output=path("output"),
                rate=float(kv["rate"]) if "rate" in kv else None,
                column=int(kv.get("column", 0)),
                mode=FormulaMode(kv.get("mode", "cross")),
                annotations=path("annotations"),
                tolerance=float(kv.get("tolerance", 0.150)),
                peak_height=float(kv["peak_height"]) if "peak_height" in kv else None,
                jobs=int(kv.get("jobs", 1)),
            )
        except KeyError as exc:
            raise UsageError(f"sweep config missing key {exc.args[0]!r}") from None
        except ValueError as exc:
            raise UsageError(f"bad sweep config value: {exc}") from None


def _read_annotations(path) -> np.ndarray:
    channels = read_csv(path, sample_rate=1.0)
    return np.sort(np.asarray(channels[0].samples, dtype=float))


def _sweep_one(task) -> list:
    eps, signal, spec, truth = task
    stream = sample_batch(signal, SamplerConfig(epsilon=eps, formula_mode=spec.mode))
    row: list = [eps]
    for metric in spec.metrics:
        if metric == "event_count":
            row.append(len(stream))
        elif metric == "srf":
            row.append(srf(len(stream), signal.duration, signal.sample_rate))
        elif metric == "rmse_reconstruction":
            rec = resample_uniform(stream, signal.sample_rate)
            row.append(rmse(rec, UniformSignal(signal.samples.astype(float), signal.sample_rate)))
        elif metric == "f1_vs_annotations":
            s = signal.samples
            height = spec.peak_height
            if height is None:
                height = 0.5 * (float(np.min(s)) + float(np.max(s)))
            det = [ex.index / signal.sample_rate for ex in find_extrema(stream)
                   if ex.kind == "peak" and ex.value >= height]
            res = match_events(det, truth.tolist(), spec.tolerance)
            row.append(res.f1 if res.true_positives + res.false_positives + res.false_negatives else 0.0)
    return row


def run_sweep(spec: SweepSpec) -> list[list]:
    signal = _load_channel(spec.input, spec.rate, spec.column)
    truth = _read_annotations(spec.annotations) if spec.annotations else None
    tasks = [(eps, signal, spec, truth) for eps in spec.thresholds]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


def cmd_sweep(args, out) -> None:
    if args.config:
        kv = read_kv(args.config)
        spec = SweepSpec.from_kv(kv, Path(args.config).parent)
        overrides = {k: v for k, v in (("input", args.input), ("output", args.output)) if v}
        for k, v in overrides.items():
            setattr(spec, k, Path(v))
    else:
        if not (args.input and args.output and args.thresholds):
            raise UsageError("sweep needs --config or INPUT, -o and --thresholds")
        spec = SweepSpec(
            thresholds=[float(t) for t in args.thresholds.split(",") if t.strip()],
            metrics=[m.strip() for m in args.metrics.split(",") if m.strip()],
            input=Path(args.input), output=Path(args.output), rate=args.rate,
            column=args.column, mode=args.mode,
            annotations=Path(args.annotations) if args.annotations else None,
            tolerance=args.tolerance, peak_height=args.peak_height, jobs=args.jobs)
    if spec.input is None or spec.output is None:
        raise UsageError("sweep needs an input and an output path")
    rows = run_sweep(spec)
    write_table(out(spec.output), ["epsilon", *spec.metrics], rows)


def cmd_breath(args, out) -> None:
    signal = _load_channel(args.input, args.rate, args.column)
    signal = UniformSignal(signal.samples.astype(float), signal.sample_rate)
    config = BreathConfig(batch_window=args.batch_window,
                          global_time_threshold_init=args.time_threshold)
    eps = _epsilon(args, signal)
    stream = sample_batch(signal, _sampler_config(eps, args.mode))
    uni = breath_rate(signal, config)
    evt = breath_rate(stream, config)
    table = {}
    for series, col in ((uni, 0), (evt, 1)):
        for t, v in zip(series.times.tolist(), series.values.tolist()):
            table.setdefault(t, [None, None])[col] = v
    rows = [[t, *("" if v is None else v for v in table[t])] for t in sorted(table)]
    write_table(out(args.output), ["time", "uniform_bpm", "event_bpm"], rows)
    try:
        diff = fmt(rmse(uni, evt))
    except ValueError:
        diff = "nan"
    value = srf(len(stream), signal.duration, signal.sample_rate)
    print(f"epsilon={fmt(float(eps))} events={len(stream)} srf={fmt(value)} rmse_uniform_vs_event={diff}")


def cmd_hwsim(args, out) -> None:
    signal = _load_channel(args.input, args.rate, args.column)
    words = signal.samples
    if args.full_scale is not None:
        adc = Adc(args.full_scale, args.sample_bits)
        words = adc.convert(words)
    elif words.dtype.kind != "i":
        raise DataError("hwsim input must be integer ADC words (or pass --full-scale)")
    config = HwConfig(sample_bits=args.sample_bits, index_bits=args.index_bits,
                      accumulator_bits=args.accumulator_bits, epsilon_register=args.epsilon,
                      sampling_f=signal.sample_rate)
    rows, circuit = run_trace(words.tolist(), config)
    write_table(out(args.output), ["step", "valid", "sample", "index"], rows)
    n_valid = sum(r.valid for r in rows)
    print(f"steps={len(rows)} events={n_valid} forced={circuit.forced_emissions} "
          f"fault={int(circuit.fault)}")


def load_energy_params(path) -> tuple[en.EnergyParams, list[float], float]:
    """Energy parameters, the frequencies for the savings table, and the working point."""
    kv = read_kv(path) if path else {}

    def qty(key, unit, default):
        return parse_quantity(kv[key], unit) if key in kv else default

    def point(key, default):
        if key not in kv:
            return default
        parts = [p.strip() for p in kv[key].split(",")]
        if len(parts) != 2:
            raise DataError(f"{key} must be 'FREQ, ENERGY'")
        return parse_quantity(parts[0], "Hz"), parse_quantity(parts[1], "J")

    model = en.fit_affine_mcu_model(point("mcu_point_lo", en.MCU_POINT_LO),
                                    point("mcu_point_hi", en.MCU_POINT_HI))
    base = en.EnergyParams(
        pas_dynamic_power=qty("pas_dynamic_power", "W", 1.242e-6),
        pas_leakage_power=qty("pas_leakage_power", "W", 0.428e-6),
        per_sample_active_time=qty("per_sample_active_time", "s", 7.09e-9),
        window_duration=qty("window_duration", "s", 20.0),
        uniform_rate=qty("uniform_rate", "Hz", 360.0),
        mcu_model=model,
    )
    working = qty("working_freq", "Hz", 17.1)
    if "uniform_algo_energy" in kv:
        uniform = parse_quantity(kv["uniform_algo_energy"], "J")
    else:
        savings = float(kv.get("calibrate_savings", 0.446))
        calib_leak = qty("calibration_leakage_power", "W", base.pas_leakage_power)
        uniform = en.calibrate_uniform_energy(base.with_(pas_leakage_power=calib_leak), working, savings)
    params = base.with_(uniform_algo_energy=uniform)
    freqs = [parse_quantity(f.strip(), "Hz") for f in kv.get("table_freqs", "10,17.1,30,60,120,204,360").split(",")]
    return params, freqs, working


def energy_report(params: en.EnergyParams, freqs, working) -> list[list]:
    u = 1e6
    win = en.pas_window_energy(params)
    rows = [
        ["pas_active_energy_pJ", win.active * 1e12],
        ["pas_leakage_energy_uJ", win.leakage * u],
        ["pas_total_energy_uJ", win.total * u],
        ["mcu_slope_uJ_per_Hz", params.mcu_model.slope * u],
        ["mcu_intercept_uJ", params.mcu_model.intercept * u],
        ["uniform_algo_energy_uJ", params.uniform_algo_energy * u],
    ]
    try:
        rows.append(["crossover_frequency_Hz", en.crossover_frequency(params)])
    except ValueError:
        rows.append(["crossover_frequency_Hz", "none"])
    rows.append(["savings_at_working_point", en.savings_at(params, working)])
    rows.append(["working_freq_Hz", working])
    return rows


def cmd_energy(args, out) -> None:
    params, freqs, working = load_energy_params(args.params)
    summary = energy_report(params, freqs, working)
    table = [[f, params.mcu_model(f) * 1e6, en.event_system_energy(params, f) * 1e6,
              en.savings_at(params, f)] for f in freqs]
    lines = ["quantity,value"] + [f"{k},{fmt(v)}" for k, v in summary]
    lines += ["", "freq_Hz,mcu_uJ,event_system_uJ,savings"]
    lines += [",".join(fmt(v) for v in row) for row in table]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(out(args.output)).write_text(text)
    sys.stdout.write(text)


def cmd_fixture(args, out) -> None:
    params = {}
    for item in args.param:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = float(v)
    params["rate"] = args.rate
    signal = gen_fixture(args.kind, params, args.seed)
    write_csv(out(args.output), signal)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pas", description="Polygonal-approximation event-based sampling toolkit.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def sampling_flags(sp, need_eps=True):
        g = sp.add_mutually_exclusive_group(required=need_eps)
        g.add_argument("--epsilon", type=float, help="threshold in amplitude*sample units")
        g.add_argument("--epsilon-frac", type=float, help="threshold as a fraction of peak-to-peak")
        sp.add_argument("--mode", type=_mode, default=FormulaMode.CROSS_PRODUCT,
                        help="accumulator formula: cross (default) or verbatim")

    def input_flags(sp):
        sp.add_argument("input")
        sp.add_argument("--rate", type=float, help="sample rate in Hz")
        sp.add_argument("--column", type=int, default=0, help="value column (0-based)")

    sp = sub.add_parser("sample", help="CSV signal to PASE event file")
    input_flags(sp)
    sampling_flags(sp)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("reconstruct", help="PASE event file to uniform CSV")
    sp.add_argument("input")
    sp.add_argument("--rate", type=float, help="target rate (default: stream rate)")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("sweep", help="metrics over a list of thresholds")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--config")
    sp.add_argument("--rate", type=float)
    sp.add_argument("--column", type=int, default=0)
    sp.add_argument("--thresholds", help="comma-separated epsilons")
    sp.add_argument("--metrics", default="event_count,srf")
    sp.add_argument("--mode", type=_mode, default=FormulaMode.CROSS_PRODUCT)
    sp.add_argument("--annotations", help="CSV of reference event times in seconds")
    sp.add_argument("--tolerance", type=float, default=0.150)
    sp.add_argument("--peak-height", type=float)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("breath", help="breath rate, uniform and event-based")
    input_flags(sp)
    sampling_flags(sp)
    sp.add_argument("--batch-window", type=float, default=5.0)
    sp.add_argument("--time-threshold", type=float, default=1.2)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_breath)

    sp = sub.add_parser("hwsim", help="port-level trace of the circuit model")
    input_flags(sp)
    sp.add_argument("--epsilon", type=int, required=True)
    sp.add_argument("--sample-bits", type=int, default=16)
    sp.add_argument("--index-bits", type=int, default=16)
    sp.add_argument("--accumulator-bits", type=int, default=32)
    sp.add_argument("--full-scale", type=float, help="quantize real-valued input first")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_hwsim)

    sp = sub.add_parser("energy", help="per-window energy report")
    sp.add_argument("params", nargs="?", help="key=value parameter file")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("fixture", help="write a synthetic signal as CSV")
    sp.add_argument("kind", choices=KINDS)
    sp.add_argument("--param", action="append", default=[], help="key=value, repeatable")
    sp.add_argument("--rate", type=float, default=360.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_fixture)
    return p


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    created: list[Path] = []

    def out(path) -> Path:
        path = Path(path)
        created.append(path)
        return path

    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing subcommand")
        args.func(args, out)
    except UsageError as exc:
        code = _fail("usage", str(exc), EXIT_USAGE)
    except (DataError, ValueError, OSError) as exc:
        code = _fail("data", str(exc), EXIT_DATA)
    else:
        return EXIT_OK
    for path in created:
        path.unlink(missing_ok=True)
    return code


if __name__ == "__main__":
    sys.exit(main())
