"""DTF1 tensor files, flat key-value config files and CSV output.

DTF1 layout (all little-endian)::

    b"DTF1" | u32 order m | m x u64 extents | d_* x f64 values (row-major)
"""
from __future__ import annotations

import csv
import math
import struct

import numpy as np

from .errors import ArgumentError, Dtf1Error

MAGIC = b"DTF1"


def write_dtf1(tensor, path) -> None:
    t = np.ascontiguousarray(tensor, dtype="<f8")
    if t.ndim < 1 or 0 in t.shape:
        raise ArgumentError(f"cannot store a tensor of shape {t.shape}")
    header = MAGIC + struct.pack("<I", t.ndim) + struct.pack(f"<{t.ndim}Q", *t.shape)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(t.tobytes(order="C"))
    except OSError as exc:
        raise Dtf1Error(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_dtf1(path) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise Dtf1Error(f"cannot read {path}: {exc.strerror or exc}") from exc
    if len(raw) < 8:
        raise Dtf1Error(f"{path}: truncated header", offset=len(raw))
    if raw[:4] != MAGIC:
        raise Dtf1Error(f"{path}: bad magic {raw[:4]!r}, expected {MAGIC!r}", offset=0)
    (order,) = struct.unpack_from("<I", raw, 4)
    if order < 1:
        raise Dtf1Error(f"{path}: tensor order must be >= 1", offset=4)
    end = 8 + 8 * order
    if len(raw) < end:
        raise Dtf1Error(f"{path}: truncated extents", offset=len(raw))
    dims = struct.unpack_from(f"<{order}Q", raw, 8)
    for k, d in enumerate(dims):
        if d == 0:
            raise Dtf1Error(f"{path}: extent of mode {k + 1} is 0", offset=8 + 8 * k)
    count = math.prod(dims)
    if len(raw) != end + 8 * count:
        raise Dtf1Error(f"{path}: payload holds {len(raw) - end} bytes, header implies {8 * count}",
                        offset=min(len(raw), end + 8 * count))
    values = np.frombuffer(raw, dtype="<f8", count=count, offset=end)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise Dtf1Error(f"{path}: non-finite value", offset=end + 8 * int(bad[0]))
    return values.astype(np.float64).reshape(dims)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (tuple, list)):
        return " ".join(format_value(x) for x in v)
    return str(v)


def write_csv(rows, schema, path) -> None:
    """Write dict rows under the column list ``schema``; floats with 17 significant digits."""
    schema = list(schema)
    for i, row in enumerate(rows):
        missing = [c for c in schema if c not in row]
        if missing:
            raise ArgumentError(f"row {i} lacks columns {missing}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(schema)
        for row in rows:
            w.writerow([format_value(row[c]) for c in schema])


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Values become int, float, or a list of those when comma-separated;
    anything else stays a string.
    """
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ArgumentError(f"config line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ArgumentError(f"config line {lineno}: empty key")
        out[key] = _parse_value(value)
    return out


def _scalar(s):
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    return s


def _parse_value(value):
    if "," in value:
        return [_scalar(v.strip()) for v in value.split(",") if v.strip()]
    return _scalar(value)


def read_config(path) -> dict:
    with open(path) as fh:
        return parse_config(fh.read())
