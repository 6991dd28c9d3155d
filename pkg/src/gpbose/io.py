"""Deterministic CSV / JSON / binary writers.

Floats are written with 17 significant digits so values round-trip exactly;
JSON is emitted with sorted keys. Together this makes repeated runs with the
same inputs byte-identical.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # json has no inf/nan; keep them as strings rather than emit invalid output
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def write_field_csv(path, phi, spacing, origin=None):
    """Flattened C-order field as ``re,im`` rows below a ``# shape=...`` header."""
    phi = np.asarray(phi)
    path = Path(path)
    origin = [0.0] * phi.ndim if origin is None else list(origin)
    with open(path, "w", newline="") as fh:
        fh.write("# shape=" + "x".join(str(s) for s in phi.shape)
                 + " spacing=" + fmt(spacing) + " origin=" + ";".join(fmt(o) for o in origin) + "\n")
        fh.write("re,im\n")
        for z in phi.ravel():
            fh.write(fmt(z.real) + "," + fmt(z.imag) + "\n")
    return path


def write_field_binary(path, phi, spacing, origin=None, extra=None):
    """Raw little-endian complex128 plus a JSON sidecar ``<path>.json``."""
    phi = np.ascontiguousarray(phi, dtype="<c16")
    path = Path(path)
    path.write_bytes(phi.tobytes())
    meta = {
        "dtype": "complex128-le",
        "order": "C",
        "shape": list(phi.shape),
        "spacing": float(spacing),
        "origin": [0.0] * phi.ndim if origin is None else [float(o) for o in origin],
    }
    if extra:
        meta.update(extra)
    side = path.with_name(path.name + ".json")
    write_json(side, meta)
    return path, side


def read_field_binary(path):
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    data = np.frombuffer(path.read_bytes(), dtype="<c16").reshape(meta["shape"])
    return data.copy(), meta
