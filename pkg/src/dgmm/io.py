"""Serialization helpers: CSV for curves/profiles/sweeps, JSON-sidecar
field dumps, and atomic writes with deterministic float formatting."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .cell2d import Field2D
from .curves import Curve
from .errors import InputError


def fmt(x) -> str:
    """Shortest round-trip decimal form; fixed across runs and platforms."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v
                              for v in row))
    return "\n".join(lines) + "\n"


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# curves and profiles


def curve_to_csv(curve: Curve) -> str:
    rows = [(s, M[0, 0], M[0, 1], M[1, 0], M[1, 1])
            for s, M in zip(curve.params, curve.values)]
    return rows_to_csv(("s", "M11", "M12", "M21", "M22"), rows)


def curve_from_csv(text: str) -> Curve:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0].split(",")[0] != "s":
        raise InputError("curve CSV must start with header s,M11,M12,M21,M22")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.ndim != 2 or data.shape[1] != 5:
        raise InputError("curve CSV rows must have 5 columns")
    return Curve(params=data[:, 0], values=data[:, 1:].reshape(-1, 2, 2))


def profile_to_csv(s, g) -> str:
    rows = [(si, gi[0], gi[1]) for si, gi in zip(s, g)]
    return rows_to_csv(("s", "g1", "g2"), rows)


# ---------------------------------------------------------------------------
# field dumps


def dump_field(field: Field2D, path, meta: dict = None) -> None:
    """CSV of node values plus a JSON sidecar describing the grid."""
    path = Path(path)
    n1, n2 = field.x1.size, field.x2.size
    rows = []
    for i in range(n1):
        for j in range(n2):
            rows.append((field.x1[i], field.x2[j],
                         field.values[i, j, 0], field.values[i, j, 1]))
    atomic_write(path, rows_to_csv(("x1", "x2", "u1", "u2"), rows))
    sidecar = {
        "n1": n1, "n2": n2,
        "x1_min": float(field.x1[0]), "x1_max": float(field.x1[-1]),
        "x2_min": float(field.x2[0]), "x2_max": float(field.x2[-1]),
        "periodic_x1": bool(field.periodic_x1),
        "layout": "row-major (x1 outer, x2 inner)",
    }
    sidecar.update(meta or {})
    atomic_write(path.with_suffix(path.suffix + ".json"),
                 json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def load_field(path) -> Field2D:
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".json")) as f:
        meta = json.load(f)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    n1, n2 = int(meta["n1"]), int(meta["n2"])
    if data.shape != (n1 * n2, 4):
        raise InputError("field CSV does not match its sidecar dimensions")
    x1 = data[::n2, 0]
    x2 = data[:n2, 1]
    values = data[:, 2:4].reshape(n1, n2, 2)
    return Field2D(x1=x1, x2=x2, values=values,
                   periodic_x1=bool(meta["periodic_x1"]))
