"""File formats: grid CSV (``s,t,x1,x2,x3,x4``), OBJ meshes and JSON reports."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import ConfigError
from .geometry import Jet2, SurfacePatch

CSV_HEADER = ["s", "t", "x1", "x2", "x3", "x4"]


def fmt(v: float) -> str:
    return f"{float(v):.17g}"


def write_points_csv(path, s_nodes, t_nodes, points) -> None:
    """Row-major (s outer, t inner) grid of points, shape ``(n_s, n_t, 4)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for a, s in enumerate(s_nodes):
            for b, t in enumerate(t_nodes):
                w.writerow([fmt(s), fmt(t)] + [fmt(c) for c in points[a, b]])


def read_points_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a grid CSV back into ``(s_nodes, t_nodes, points)``."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError("surface.csv", f"cannot read {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != CSV_HEADER:
        raise ConfigError("surface.csv", f"expected header {','.join(CSV_HEADER)}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ConfigError("surface.csv", f"non-numeric entry: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 6:
        raise ConfigError("surface.csv", "every row needs six columns")
    s_nodes, t_nodes = np.unique(data[:, 0]), np.unique(data[:, 1])
    if len(s_nodes) * len(t_nodes) != len(data):
        raise ConfigError("surface.csv", "rows do not form a complete tensor grid")
    points = np.full((len(s_nodes), len(t_nodes), 4), np.nan)
    ia = np.searchsorted(s_nodes, data[:, 0])
    ib = np.searchsorted(t_nodes, data[:, 1])
    points[ia, ib] = data[:, 2:]
    return s_nodes, t_nodes, points


def interpolated_surface(s_nodes, t_nodes, points, degree: int = 5, label: str = "sampled") -> SurfacePatch:
    """Tensor-product interpolating spline through grid samples; jets come from the spline."""
    k = min(degree, len(s_nodes) - 1, len(t_nodes) - 1)
    splines = [RectBivariateSpline(s_nodes, t_nodes, points[:, :, c], kx=k, ky=k, s=0) for c in range(4)]

    def ev(s, t, ds=0, dt=0):
        return np.array([float(sp.ev(s, t, dx=ds, dy=dt)) for sp in splines])

    def rule(s, t):
        return Jet2(s, t, ev(s, t), ev(s, t, 1, 0), ev(s, t, 0, 1), ev(s, t, 2, 0), ev(s, t, 1, 1), ev(s, t, 0, 2))

    domain = (float(s_nodes[0]), float(s_nodes[-1]), float(t_nodes[0]), float(t_nodes[-1]))
    return SurfacePatch(lambda s, t: ev(s, t), domain, rule, label)


def csv_surface(path, degree: int = 5) -> SurfacePatch:
    s_nodes, t_nodes, points = read_points_csv(path)
    if min(len(s_nodes), len(t_nodes)) < 4:
        raise ConfigError("surface.csv", "need at least 4 samples per axis")
    return interpolated_surface(s_nodes, t_nodes, points, degree, label=str(path))


def grid_faces(n_s: int, n_t: int) -> list[tuple[int, int, int]]:
    """Two triangles per cell over row-major vertices, 0-based."""
    faces = []
    for a in range(n_s - 1):
        for b in range(n_t - 1):
            v00 = a * n_t + b
            v01, v10, v11 = v00 + 1, v00 + n_t, v00 + n_t + 1
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    return faces


def write_obj(path, vertices, faces) -> None:
    with open(path, "w") as fh:
        for v in vertices:
            fh.write("v " + " ".join(fmt(c) for c in v) + "\n")
        for f in faces:
            fh.write("f " + " ".join(str(i + 1) for i in f) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_report(doc: dict) -> str:
    """Deterministic JSON text (sorted keys, non-finite numbers as null)."""
    return json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(path, doc: dict) -> None:
    Path(path).write_text(dumps_report(doc))
