"""CSV ingestion/output, the PASE binary event format, and key=value configs.

PASE layout (all little-endian)::

    b"PASE"            magic
    u8                 version (1)
    f64                sample_rate
    f64                epsilon (NaN when unknown)
    u8                 value_bits (32)
    u8                 frac_bits: stored integer = value * 2**frac_bits
    records            (u32 delta_index, i32 value) repeated
"""

from __future__ import annotations

import csv
import math
import re
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .streams import EventSample, EventStream, UniformSignal


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class PaseCorruptError(DataError):
    def __init__(self, message: str, recovered: EventStream):
        super().__init__(message)
        self.recovered = recovered


TIME_COLUMNS = ("index", "time", "t", "sample")
_RATE_RE = re.compile(r"#\s*sample_rate\s*[=:]\s*([0-9.eE+-]+)")


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_csv(path, sample_rate: float | None = None) -> list[UniformSignal]:
    """Read one uniform signal per value column.

    A optional header row names the columns; a first column called
    ``index``/``time``/``t``/``sample`` is the time base and is not returned
    as a channel. The rate comes from ``sample_rate``, a ``# sample_rate=N``
    comment line, or a ``time`` column, in that order.
    """
    rate_hint = None
    header = None
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(csv.reader(fh), start=1):
            if not raw or all(not c.strip() for c in raw):
                continue
            first = raw[0].strip()
            if first.startswith("#"):
                m = _RATE_RE.match(",".join(raw).strip())
                if m:
                    rate_hint = float(m.group(1))
                continue
            cells = [c.strip() for c in raw]
            if header is None and not rows and not all(_is_number(c) for c in cells):
                header = [c.lower() for c in cells]
                continue
            try:
                row = [float(c) for c in cells]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value in row {raw!r}") from None
            width = len(header) if header else (len(rows[0]) if rows else len(row))
            if len(row) != width:
                raise DataError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: no data rows")
    data = np.array(rows)
    time_kind = header[0] if header and header[0] in TIME_COLUMNS else None
    if time_kind:
        base, data = data[:, 0], data[:, 1:]
        if data.shape[1] == 0:
            raise DataError(f"{path}: no value columns")
        if len(base) > 1 and np.any(np.diff(base) <= 0):
            bad = int(np.argmax(np.diff(base) <= 0)) + 1
            raise DataError(f"{path}: {time_kind} column is not strictly increasing at data row {bad + 1}")
        if sample_rate is None and rate_hint is None and time_kind in ("time", "t") and len(base) > 1:
            rate_hint = (len(base) - 1) / (base[-1] - base[0])
    rate = sample_rate if sample_rate is not None else rate_hint
    if rate is None:
        raise DataError(f"{path}: sample rate not given (use --rate or a '# sample_rate=' header)")
    if not rate > 0:
        raise DataError(f"{path}: sample rate must be positive")
    if np.all(data == np.round(data)):
        data = data.astype(np.int64)
    return [UniformSignal(data[:, k].copy(), rate) for k in range(data.shape[1])]


def fmt(value) -> str:
    """Fixed 9-significant-digit text for floats; ints and strings verbatim."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_csv(path, signal: UniformSignal, start_index: int = 0) -> None:
    """Uniform signal as ``index,value`` rows with a sample-rate comment."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# sample_rate={fmt(float(signal.sample_rate))}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "value"])
        for k, v in enumerate(signal.samples.tolist()):
            w.writerow([start_index + k, fmt(v)])


_MAGIC = b"PASE"
_VERSION = 1
_HEADER = struct.Struct("<4sBddBB")
_RECORD = struct.Struct("<Ii")
_I32_MAX = 2**31 - 1


def _auto_frac_bits(values: np.ndarray) -> int:
    if not len(values) or np.all(values == np.round(values)):
        return 0
    peak = float(np.max(np.abs(values)))
    frac = 24
    while frac > 0 and peak * 2**frac > _I32_MAX:
        frac -= 1
    return frac


def encode_events(stream: EventStream, frac_bits: int | None = None) -> bytes:
    values = stream.values
    if frac_bits is None:
        frac_bits = _auto_frac_bits(values)
    if not 0 <= frac_bits <= 31:
        raise ValueError("frac_bits must be in [0, 31]")
    eps = math.nan if stream.epsilon_used is None else float(stream.epsilon_used)
    out = bytearray(_HEADER.pack(_MAGIC, _VERSION, float(stream.sample_rate), eps, 32, frac_bits))
    scale = 2**frac_bits
    for ev in stream.events:
        q = int(round(float(ev.value) * scale))
        if not -(2**31) <= q <= _I32_MAX:
            raise ValueError(f"value {ev.value} does not fit 32-bit fixed point with {frac_bits} fraction bits")
        if not 0 <= ev.delta_index <= 2**32 - 1:
            raise ValueError("delta_index does not fit u32")
        out += _RECORD.pack(ev.delta_index, q)
    return bytes(out)


def decode_events(data: bytes) -> EventStream:
    if len(data) < _HEADER.size:
        raise DataError("PASE header truncated")
    magic, version, rate, eps, value_bits, frac_bits = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise DataError(f"bad magic {magic!r}")
    if version != _VERSION:
        raise DataError(f"unsupported PASE version {version}")
    if value_bits != 32:
        raise DataError(f"unsupported value width {value_bits}")
    epsilon = None if math.isnan(eps) else eps
    body = memoryview(data)[_HEADER.size:]
    n_full, rest = divmod(len(body), _RECORD.size)
    scale = 2**frac_bits
    events = []
    for delta, q in _RECORD.iter_unpack(body[: n_full * _RECORD.size]):
        events.append(EventSample(q if frac_bits == 0 else q / scale, delta))
    stream = EventStream(tuple(events), rate, epsilon)
    if rest:
        raise PaseCorruptError(
            f"truncated record after {n_full} complete records ({rest} trailing bytes)", stream)
    return stream


def write_events(path, stream: EventStream, frac_bits: int | None = None) -> None:
    Path(path).write_bytes(encode_events(stream, frac_bits))


def read_events(path) -> EventStream:
    return decode_events(Path(path).read_bytes())


def read_kv(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise DataError(f"{path}:{lineno}: empty key")
        out[key.lower()] = value
    return out


_PREFIX = {"p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "μ": 1e-6, "m": 1e-3, "": 1.0, "k": 1e3, "M": 1e6}
_QTY_RE = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([pnuµμmkM]?)(J|W|s|Hz)?\s*$")


def parse_quantity(text: str, unit: str) -> float:
    """Parse e.g. ``"1.242uW"`` or ``"7.09 ns"`` into SI units.

    A bare number is taken as already in SI units.
    """
    m = _QTY_RE.match(text)
    if not m:
        raise DataError(f"cannot parse quantity {text!r}")
    number, prefix, got = m.groups()
    if got is None:
        if prefix:
            raise DataError(f"prefix without unit in {text!r}")
        return float(number)
    if got != unit:
        raise DataError(f"expected unit {unit} in {text!r}")
    return float(number) * _PREFIX[prefix]
