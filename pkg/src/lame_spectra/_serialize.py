"""Deterministic JSON/CSV serialization for CLI artifacts.

Floats are written with 17 significant digits (round-trip exact for binary64)
so that identical configs reproduce byte-identical payloads.  Complex numbers
become [re, im] pairs; CSV splits them into _re/_im columns.  Non-finite
numbers are rejected before write, with one sanctioned exception: the
non-reducible datum D = infinity serializes as the string "inf".
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .errors import LameSpectraError


class NonFiniteValueError(LameSpectraError):
    pass


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise NonFiniteValueError(f"non-finite value {x!r} in output payload")
    return format(x, ".17g")


def encode(obj):
    """Normalize a payload tree: complex -> [re, im], numpy -> python."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [encode(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        if math.isinf(c.real) or math.isinf(c.imag):
            return "inf"
        return [c.real, c.imag]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dump_json(obj, indent: int = 0) -> str:
    """Render an encoded payload with fixed float formatting."""
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  "{k}": {dump_json(v, indent + 2)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        flat = all(not isinstance(v, (dict, list)) for v in obj)
        if flat and len(obj) <= 8:
            return "[" + ", ".join(dump_json(v) for v in obj) + "]"
        items = [f"{pad}  {dump_json(v, indent + 2)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise NonFiniteValueError(f"unserializable object {obj!r}")


def config_hash(config: dict) -> str:
    return hashlib.sha256(dump_json(encode(config)).encode("utf-8")).hexdigest()[:16]


def dump_csv(rows, header) -> str:
    """Comma-delimited text with a mandatory header row."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(fmt_float(v))
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
