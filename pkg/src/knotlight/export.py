"""CSV and legacy ASCII VTK writers (atomic) and matching readers."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .topology import Curve

__all__ = [
    "atomic_write",
    "CSV_COLUMNS",
    "write_curve_csv",
    "write_curves_csv",
    "read_curve_csv",
    "csv_paths",
    "write_polydata",
    "read_polydata",
    "write_structured_points",
    "read_structured_points",
    "write_curves",
]


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _g(x) -> str:
    return "%.17g" % x


# -- CSV ---------------------------------------------------------------------------


CSV_COLUMNS = ("index", "x", "y", "z", "arclength")


def write_curve_csv(path, curve: Curve) -> Path:
    """One row per vertex with a header row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for n, (p, s) in enumerate(zip(curve.points, curve.arclength)):
        w.writerow([n, _g(p[0]), _g(p[1]), _g(p[2]), _g(s)])
    return atomic_write(path, buf.getvalue())


def csv_paths(path, count: int) -> list[Path]:
    """``path`` itself for one curve, else ``stem_0.csv``, ``stem_1.csv``, ..."""
    path = Path(path)
    if count == 1:
        return [path]
    return [path.with_name(f"{path.stem}_{k}{path.suffix}") for k in range(count)]


def write_curves_csv(path, curves: Sequence[Curve]) -> list[Path]:
    return [write_curve_csv(p, c) for p, c in zip(csv_paths(path, len(curves)), curves)]


def read_curve_csv(path) -> Curve:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        data = np.array([[float(v) for v in row] for row in reader])
    if len(data) and not np.array_equal(data[:, 0], np.arange(len(data))):
        raise ValueError(f"{path}: index column is not 0..N-1")
    return Curve(data[:, 1:4], data[:, 4])


# -- VTK POLYDATA ----------------------------------------------------------------------


def write_polydata(path, curves: Sequence[Curve], title: str = "knotlight curves") -> Path:
    """Legacy ASCII POLYDATA with one polyline per curve.

    Closed curves repeat their first point index at the end of the line.
    """
    pts = np.vstack([c.points for c in curves]) if curves else np.empty((0, 3))
    lines = []
    offset = 0
    for c in curves:
        idx = list(range(offset, offset + len(c)))
        if c.closed:
            idx.append(offset)
        lines.append(idx)
        offset += len(c)
    out = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET POLYDATA"]
    out.append(f"POINTS {len(pts)} double")
    out.extend(" ".join(_g(v) for v in p) for p in pts)
    size = sum(len(l) + 1 for l in lines)
    out.append(f"LINES {len(lines)} {size}")
    out.extend(" ".join(str(v) for v in [len(l)] + l) for l in lines)
    return atomic_write(path, "\n".join(out) + "\n")


def _tokens(path):
    with open(path) as fh:
        header = [fh.readline().rstrip("\n") for _ in range(3)]
        body = fh.read().split()
    if not header[0].startswith("# vtk DataFile"):
        raise ValueError(f"{path}: not a legacy VTK file")
    if header[2].strip() != "ASCII":
        raise ValueError(f"{path}: only ASCII VTK is supported")
    return header, body


def read_polydata(path) -> tuple[np.ndarray, list[list[int]]]:
    """Points and polyline connectivity of a legacy ASCII POLYDATA file."""
    _, tok = _tokens(path)
    it = iter(tok)
    if [next(it), next(it)] != ["DATASET", "POLYDATA"]:
        raise ValueError("expected DATASET POLYDATA")
    if next(it) != "POINTS":
        raise ValueError("expected POINTS")
    n = int(next(it))
    next(it)
    pts = np.array([float(next(it)) for _ in range(3 * n)]).reshape(n, 3)
    if next(it) != "LINES":
        raise ValueError("expected LINES")
    n_lines, size = int(next(it)), int(next(it))
    lines = []
    used = 0
    for _ in range(n_lines):
        k = int(next(it))
        lines.append([int(next(it)) for _ in range(k)])
        used += k + 1
    if used != size:
        raise ValueError(f"LINES size mismatch: header {size}, counted {used}")
    if any(i < 0 or i >= n for l in lines for i in l):
        raise ValueError("line index out of range")
    return pts, lines


# -- VTK STRUCTURED_POINTS ---------------------------------------------------------------


def write_structured_points(path, origin, spacing, dims, vectors: dict, title: str = "knotlight grid") -> Path:
    """Legacy ASCII STRUCTURED_POINTS with one VECTORS array per entry.

    Each array has shape ``dims + (3,)`` indexed ``[ix, iy, iz]``; VTK wants
    x varying fastest, so the data are written in Fortran order.
    """
    dims = tuple(int(d) for d in dims)
    npts = int(np.prod(dims))
    out = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET STRUCTURED_POINTS"]
    out.append("DIMENSIONS " + " ".join(map(str, dims)))
    out.append("ORIGIN " + " ".join(_g(v) for v in origin))
    out.append("SPACING " + " ".join(_g(v) for v in spacing))
    out.append(f"POINT_DATA {npts}")
    for name, arr in vectors.items():
        arr = np.asarray(arr, dtype=float)
        if arr.shape != dims + (3,):
            raise ValueError(f"array {name!r} has shape {arr.shape}, expected {dims + (3,)}")
        flat = arr.transpose(2, 1, 0, 3).reshape(-1, 3)
        out.append(f"VECTORS {name} double")
        out.extend(" ".join(_g(v) for v in row) for row in flat)
    return atomic_write(path, "\n".join(out) + "\n")


def read_structured_points(path) -> dict:
    """Returns dims, origin, spacing and the VECTORS arrays (indexed [ix, iy, iz])."""
    _, tok = _tokens(path)
    it = iter(tok)
    if [next(it), next(it)] != ["DATASET", "STRUCTURED_POINTS"]:
        raise ValueError("expected DATASET STRUCTURED_POINTS")
    meta = {}
    for key, conv in (("DIMENSIONS", int), ("ORIGIN", float), ("SPACING", float)):
        if next(it) != key:
            raise ValueError(f"expected {key}")
        meta[key.lower()] = tuple(conv(next(it)) for _ in range(3))
    if next(it) != "POINT_DATA":
        raise ValueError("expected POINT_DATA")
    npts = int(next(it))
    dims = meta["dimensions"]
    if npts != int(np.prod(dims)):
        raise ValueError("POINT_DATA count does not match DIMENSIONS")
    arrays = {}
    for tag in it:
        if tag != "VECTORS":
            raise ValueError(f"unsupported section {tag!r}")
        name = next(it)
        next(it)
        flat = np.array([float(next(it)) for _ in range(3 * npts)]).reshape(npts, 3)
        arrays[name] = flat.reshape(dims[2], dims[1], dims[0], 3).transpose(2, 1, 0, 3)
    meta["vectors"] = arrays
    return meta


def write_curves(path, curves: Sequence[Curve]) -> list[Path]:
    """Dispatch on suffix: ``.csv`` (one file per curve) or ``.vtk`` (one file)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return write_curves_csv(path, curves)
    if suffix == ".vtk":
        return [write_polydata(path, curves)]
    raise ValueError(f"unsupported output format {suffix!r}; use .csv or .vtk")
