"""Run configuration: a JSON document describing a recipe (or a bundled /
sampled surface), grid resolution, tolerances, projection and output paths.

Example::

    {
      "recipe": {
        "family": "NC-1",
        "theta": {"kind": "linear", "a": 0.3, "b": 0.6},
        "phi": {"kind": "latitude", "z0": 0.7071067811865476},
        "psi": {"kind": "constant", "value": 0.4},
        "s0": 0.0,
        "domain": {"s": [0.05, 1.2], "t": [0.0, 3.0]}
      },
      "grid": [20, 20],
      "tolerances": {"eigen": 1e-5}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .analysis import CpdContext
from .errors import ConfigError, RecipeError
from .generators import (
    FAMILIES,
    GeneratorRecipe,
    SphereCurve,
    generate,
    great_circle,
    latitude_circle,
    spherical_spiral,
    tilted_great_circle,
)
from .geometry import SurfacePatch
from .io import csv_surface
from .numerics import SmoothFunction1D
from .surfaces import BUILTIN

MIN_RESOLUTION = 8
TOLERANCE_KEYS = {
    "eigen": "eigen_tol",
    "residual": "residual_tol",
    "theta": "theta_tol",
    "theta_eps": "theta_eps",
    "chart": "chart_tol",
    "step": "step",
}


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    return v


def _get(d: dict, key: str, path: str, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    return d[key]


def _vector(value, n: int, path: str) -> list[float]:
    if not isinstance(value, list) or len(value) != n:
        raise ConfigError(path, f"expected a list of {n} numbers")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _interval(value, path: str) -> tuple[float, float]:
    lo, hi = _vector(value, 2, path)
    if not lo < hi:
        raise ConfigError(path, "interval must satisfy lo < hi")
    return lo, hi


def _check_keys(d: dict, allowed: set, path: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{path}.{sorted(extra)[0]}", "unknown field")


def parse_scalar_profile(spec, path: str):
    """Parse a theta / Psi spec into a float (``constant``) or a SmoothFunction1D.

    Accepted forms: a number (constant), a list of ascending polynomial
    coefficients, or an object with ``kind`` in ``constant``, ``linear``
    (``a + b x``), ``affine-sin`` (``a + b sin(c x + d)``) or ``polynomial``.
    """
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return _number(spec, path)
    if isinstance(spec, list):
        if not spec:
            raise ConfigError(path, "polynomial needs at least one coefficient")
        return SmoothFunction1D.polynomial([_number(c, f"{path}[{i}]") for i, c in enumerate(spec)])
    if not isinstance(spec, dict):
        raise ConfigError(path, f"expected a number, a coefficient list or an object, got {spec!r}")
    kind = _get(spec, "kind", path, required=True)
    if kind == "constant":
        _check_keys(spec, {"kind", "value"}, path)
        return _number(_get(spec, "value", path, required=True), f"{path}.value")
    if kind == "linear":
        _check_keys(spec, {"kind", "a", "b"}, path)
        a = _number(_get(spec, "a", path, 0.0), f"{path}.a")
        b = _number(_get(spec, "b", path, required=True), f"{path}.b")
        return SmoothFunction1D.polynomial([a, b])
    if kind == "affine-sin":
        _check_keys(spec, {"kind", "a", "b", "c", "d"}, path)
        a, b, c, d = (_number(_get(spec, k, path, dflt), f"{path}.{k}")
                      for k, dflt in (("a", 0.0), ("b", 1.0), ("c", 1.0), ("d", 0.0)))
        return SmoothFunction1D(
            lambda x: a + b * math.sin(c * x + d),
            lambda x: b * c * math.cos(c * x + d),
            lambda x: -b * c * c * math.sin(c * x + d),
        )
    if kind == "polynomial":
        _check_keys(spec, {"kind", "coefficients"}, path)
        coeffs = _get(spec, "coefficients", path, required=True)
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigError(f"{path}.coefficients", "expected a non-empty list")
        return SmoothFunction1D.polynomial([_number(c, f"{path}.coefficients[{i}]") for i, c in enumerate(coeffs)])
    raise ConfigError(f"{path}.kind", f"unknown kind {kind!r} (constant, linear, affine-sin, polynomial)")


def parse_sphere_curve(spec, path: str) -> SphereCurve:
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object with a 'kind'")
    kind = _get(spec, "kind", path, required=True)
    try:
        if kind == "great-circle":
            _check_keys(spec, {"kind", "tilt", "twist"}, path)
            tilt = _number(_get(spec, "tilt", path, 0.0), f"{path}.tilt")
            twist = _number(_get(spec, "twist", path, 0.0), f"{path}.twist")
            return great_circle() if tilt == 0.0 and twist == 0.0 else tilted_great_circle(tilt, twist)
        if kind == "great-circle-basis":
            _check_keys(spec, {"kind", "a", "b"}, path)
            return great_circle(_vector(_get(spec, "a", path, required=True), 4, f"{path}.a"),
                                _vector(_get(spec, "b", path, required=True), 4, f"{path}.b"))
        if kind == "latitude":
            _check_keys(spec, {"kind", "z0"}, path)
            return latitude_circle(_number(_get(spec, "z0", path, required=True), f"{path}.z0"))
        if kind == "spiral":
            _check_keys(spec, {"kind", "rate", "polar0", "turns"}, path)
            return spherical_spiral(
                _number(_get(spec, "rate", path, 0.3), f"{path}.rate"),
                _number(_get(spec, "polar0", path, 0.6), f"{path}.polar0"),
                _number(_get(spec, "turns", path, 1.0), f"{path}.turns"),
            )
    except RecipeError as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown kind {kind!r} (great-circle, great-circle-basis, latitude, spiral)")


RECIPE_KEYS = {"family", "theta", "phi", "psi", "s0", "t0", "domain", "rho", "direction", "quad_tol", "label"}


def parse_recipe(spec, path: str = "recipe") -> GeneratorRecipe:
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object")
    _check_keys(spec, RECIPE_KEYS, path)
    family = _get(spec, "family", path, required=True)
    if family not in FAMILIES:
        raise ConfigError(f"{path}.family", f"must be one of {', '.join(FAMILIES)}")
    theta = parse_scalar_profile(_get(spec, "theta", path, required=True), f"{path}.theta")
    constant = family.startswith("C-")
    if constant and not isinstance(theta, float):
        raise ConfigError(f"{path}.theta", "constant-angle families need a constant theta")
    if not constant and isinstance(theta, float):
        theta = SmoothFunction1D.constant(theta)
    phi = parse_sphere_curve(_get(spec, "phi", path, required=True), f"{path}.phi")
    psi = None
    if family.endswith("1"):
        psi = parse_scalar_profile(_get(spec, "psi", path, required=True), f"{path}.psi")
        if isinstance(psi, float):
            psi = SmoothFunction1D.constant(psi)
    elif "psi" in spec:
        raise ConfigError(f"{path}.psi", "only Case-1 families take Psi")
    s0 = _number(_get(spec, "s0", path, 0.0), f"{path}.s0")
    t0 = spec.get("t0")
    t0 = None if t0 is None else _number(t0, f"{path}.t0")
    domain = None
    if "domain" in spec:
        d = spec["domain"]
        if not isinstance(d, dict):
            raise ConfigError(f"{path}.domain", "expected an object with 's' and/or 't'")
        _check_keys(d, {"s", "t"}, f"{path}.domain")
        s_rng = _interval(d["s"], f"{path}.domain.s") if "s" in d else (s0 + 0.05, s0 + 1.2)
        t_rng = _interval(d["t"], f"{path}.domain.t") if "t" in d else tuple(phi.domain)
        domain = (*s_rng, *t_rng)
    kwargs: dict[str, Any] = {}
    if "rho" in spec:
        kwargs["rho"] = _number(spec["rho"], f"{path}.rho")
    if "direction" in spec:
        kwargs["direction"] = tuple(_vector(spec["direction"], 4, f"{path}.direction"))
    if "quad_tol" in spec:
        kwargs["quad_tol"] = _number(spec["quad_tol"], f"{path}.quad_tol")
    return GeneratorRecipe(family, theta, phi, psi, s0=s0, t0=t0, domain=domain,
                           label=str(spec.get("label", "")), **kwargs)


def parse_grid(value, path: str = "grid") -> tuple[int, int]:
    if isinstance(value, str):
        parts = value.lower().split("x")
        try:
            value = [int(p) for p in parts]
        except ValueError:
            raise ConfigError(path, f"expected NxM, got {value!r}") from None
    if not isinstance(value, list) or len(value) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ConfigError(path, "expected [n_s, n_t] or 'NxM'")
    n_s, n_t = value
    if n_s < MIN_RESOLUTION or n_t < MIN_RESOLUTION:
        raise ConfigError(path, f"resolution must be at least {MIN_RESOLUTION} per axis")
    return n_s, n_t


@dataclass
class RunConfig:
    raw: dict
    base_dir: Path
    recipe: Optional[GeneratorRecipe] = None
    surface_spec: Optional[dict] = None
    grid: tuple[int, int] = (20, 20)
    tolerances: dict = field(default_factory=dict)
    projection: dict = field(default_factory=lambda: {"drop": 4})
    output_dir: Path = Path(".")

    def context(self) -> CpdContext:
        return CpdContext(**self.tolerances)

    def build_surface(self) -> SurfacePatch:
        """Generate the recipe surface, or load the bundled / sampled one.

        Raises RecipeError when the recipe violates its invariants.
        """
        if self.recipe is not None:
            return generate(self.recipe)
        spec = self.surface_spec
        if "builtin" in spec:
            factory = BUILTIN[spec["builtin"]]
            return factory(domain=spec["domain"]) if "domain" in spec else factory()
        path = Path(spec["csv"])
        if not path.is_absolute():
            path = self.base_dir / path
        return csv_surface(path)

    def echo(self) -> dict:
        doc = dict(self.raw)
        doc["grid"] = list(self.grid)
        doc["tolerances"] = dict(self.tolerances)
        doc.pop("output", None)
        return doc


def parse_config(raw: dict, base_dir: Path = Path("."), grid_override=None, tol_override=None,
                 out_override=None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("$", "configuration must be a JSON object")
    _check_keys(raw, {"command", "recipe", "surface", "grid", "tolerances", "projection", "output"}, "$")
    cfg = RunConfig(raw=raw, base_dir=base_dir)
    if ("recipe" in raw) == ("surface" in raw):
        raise ConfigError("$", "exactly one of 'recipe' or 'surface' is required")
    if "recipe" in raw:
        cfg.recipe = parse_recipe(raw["recipe"])
    else:
        spec = raw["surface"]
        if not isinstance(spec, dict):
            raise ConfigError("surface", "expected an object")
        _check_keys(spec, {"builtin", "csv", "domain"}, "surface")
        if ("builtin" in spec) == ("csv" in spec):
            raise ConfigError("surface", "exactly one of 'builtin' or 'csv' is required")
        if "builtin" in spec and spec["builtin"] not in BUILTIN:
            raise ConfigError("surface.builtin", f"unknown surface (choose from {', '.join(sorted(BUILTIN))})")
        if "domain" in spec:
            d = spec["domain"]
            if not isinstance(d, dict) or set(d) != {"s", "t"}:
                raise ConfigError("surface.domain", "expected an object with 's' and 't'")
            spec = dict(spec, domain=(*_interval(d["s"], "surface.domain.s"), *_interval(d["t"], "surface.domain.t")))
        cfg.surface_spec = spec

    cfg.grid = parse_grid(grid_override if grid_override is not None else raw.get("grid", [20, 20]),
                          "--grid" if grid_override is not None else "grid")

    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances", "expected an object")
    _check_keys(tol, set(TOLERANCE_KEYS), "tolerances")
    for key, value in tol.items():
        v = _number(value, f"tolerances.{key}")
        if v <= 0:
            raise ConfigError(f"tolerances.{key}", "must be positive")
        cfg.tolerances[TOLERANCE_KEYS[key]] = v
    if tol_override is not None:
        if not tol_override > 0:
            raise ConfigError("--tol", "must be positive")
        cfg.tolerances["eigen_tol"] = float(tol_override)

    proj = raw.get("projection", {"drop": 4})
    if not isinstance(proj, dict) or len(proj) != 1 or not set(proj) <= {"drop", "direction"}:
        raise ConfigError("projection", "expected {'drop': 1..4} or {'direction': [4 numbers]}")
    if "drop" in proj:
        if proj["drop"] not in (1, 2, 3, 4):
            raise ConfigError("projection.drop", "coordinate index must be 1, 2, 3 or 4")
    else:
        d = np.array(_vector(proj["direction"], 4, "projection.direction"))
        if np.linalg.norm(d) == 0:
            raise ConfigError("projection.direction", "must be nonzero")
    cfg.projection = proj

    output = raw.get("output", {})
    if not isinstance(output, dict) or not isinstance(output.get("dir", "."), str):
        raise ConfigError("output", "expected {'dir': <path>}")
    out = out_override if out_override is not None else output.get("dir", ".")
    cfg.output_dir = Path(out) if Path(out).is_absolute() or out_override is not None else base_dir / out
    return cfg


def load_config(path, **overrides) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from exc
    return parse_config(raw, path.parent, **overrides)
