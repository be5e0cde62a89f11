"""Command-line front end.

Usage::

    cpd4 generate     --config run.json [--out DIR] [--grid NxM]
    cpd4 verify       --config run.json [--out DIR] [--grid NxM] [--tol X]
    cpd4 invariants   --config run.json [--out DIR] [--grid NxM]
    cpd4 export-mesh  --config run.json [--out DIR] [--grid NxM]

Exit status: 0 success / CPD, 1 verified not CPD, 2 configuration or recipe
error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .analysis import (
    CpdContext,
    decompose_direction,
    grid_nodes,
    lemma_residuals,
    verify_cpd,
)
from .config import RunConfig, load_config
from .errors import ChartError, ConfigError, DegenerateAngleError, RecipeError
from .geometry import (
    first_fundamental_form,
    gauss_curvature_extrinsic,
    gauss_curvature_intrinsic,
    jet,
    mean_curvature,
    normal_commutator,
    second_fundamental,
    tangent_frame,
)
from .io import grid_faces, write_obj, write_points_csv, write_report
from .numerics import complete_basis

EXIT_OK, EXIT_NOT_CPD, EXIT_CONFIG, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def _tool() -> dict:
    return {"name": "cpd4", "version": __version__}


def _sample_grid(surface, n_s, n_t):
    s0, s1, t0, t1 = surface.domain
    s_nodes, t_nodes = np.linspace(s0, s1, n_s), np.linspace(t0, t1, n_t)
    points = np.array([[surface(s, t) for t in t_nodes] for s in s_nodes])
    return s_nodes, t_nodes, points


def _max(values):
    vals = [abs(v) for v in values if v is not None]
    return max(vals) if vals else None


def cmd_generate(cfg: RunConfig) -> int:
    surface = cfg.build_surface()
    s_nodes, t_nodes, points = _sample_grid(surface, *cfg.grid)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.output_dir / "points.csv"
    write_points_csv(path, s_nodes, t_nodes, points)
    print(f"wrote {len(s_nodes) * len(t_nodes)} points to {path}")
    return EXIT_OK


def verify_document(cfg: RunConfig, surface, ctx: CpdContext) -> dict:
    report = verify_cpd(surface, ctx, cfg.grid)
    records = []
    chart_failures = 0
    for p in report.points:
        rec = {"s": p.s, "t": p.t, "excluded": p.excluded}
        if p.excluded is None:
            rec.update(theta=p.theta, e1_theta=p.e1_theta, e2_theta=p.e2_theta, **p.h)
            rec["K"] = p.h["h3_11"] * p.h["h3_22"] - p.h["h3_12"] ** 2 + p.h["h4_11"] * p.h["h4_22"] - p.h["h4_12"] ** 2
            j = jet(surface, p.s, p.t)
            frame = decompose_direction(j, ctx)
            rec["H"] = list(mean_curvature(second_fundamental(j, frame)))
            try:
                lr = lemma_residuals(surface, ctx, p.s, p.t)
                rec["residuals"] = {k: lr.as_dict()[k] for k in ("r_a", "r_b", "r_theta", "r_m", "r_conn_11", "r_conn_21")}
            except ChartError:
                rec["residuals"] = None
                chart_failures += 1
        records.append(rec)

    used = [r for r in records if r["excluded"] is None]
    res = [r["residuals"] for r in used if r.get("residuals")]
    summary = {
        "verdict": report.verdict,
        "checks": report.checks,
        "max_offdiag": _max([r["h3_12"] for r in used] + [r["h4_12"] for r in used]),
        "max_h3_12": _max(r["h3_12"] for r in used),
        "max_h4_12": _max(r["h4_12"] for r in used),
        "max_h4_11": _max(r["h4_11"] for r in used),
        "max_h3_11_plus_e1_theta": _max(r["h3_11"] + r["e1_theta"] for r in used),
        "max_e2_theta": _max(r["e2_theta"] for r in used),
        "max_codazzi": _max([x["r_a"] for x in res] + [x["r_b"] for x in res]),
        "max_r_m": _max(x["r_m"] for x in res),
        "max_r_theta": _max(x["r_theta"] for x in res),
        "max_connection": _max([x["r_conn_11"] for x in res] + [x["r_conn_21"] for x in res]),
        "max_dtheta_dt_grid": report.max_dtheta_dt,
        "max_dtheta_ds_grid": report.max_dtheta_ds,
        "excluded_points": report.excluded,
        "chart_failures": chart_failures,
        "notes": report.notes,
    }
    return {"tool": _tool(), "command": "verify", "config": cfg.echo(), "points": records, "summary": summary}


def _fmt_opt(v) -> str:
    return "n/a" if v is None else f"{v:.3e}"


def cmd_verify(cfg: RunConfig) -> int:
    surface = cfg.build_surface()
    doc = verify_document(cfg, surface, cfg.context())
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_report(cfg.output_dir / "report.json", doc)
    summ = doc["summary"]
    word = {"CPD": "yes", "not-CPD": "no", "inconclusive": "inconclusive"}[summ["verdict"]]
    print(f"CPD: {word}  max_offdiag={_fmt_opt(summ['max_offdiag'])}  max_codazzi={_fmt_opt(summ['max_codazzi'])}")
    return {"yes": EXIT_OK, "no": EXIT_NOT_CPD, "inconclusive": EXIT_INCONCLUSIVE}[word]


def invariants_document(cfg: RunConfig, surface, ctx: CpdContext) -> dict:
    s_nodes, t_nodes = grid_nodes(surface.domain, *cfg.grid)
    records = []
    for s in s_nodes:
        for t in t_nodes:
            s, t = float(s), float(t)
            j = jet(surface, s, t)
            ff = first_fundamental_form(j)
            try:
                frame = decompose_direction(j, ctx)
            except DegenerateAngleError:
                frame = tangent_frame(j)
            sfd = second_fundamental(j, frame, ff)
            k_ext = gauss_curvature_extrinsic(sfd)
            try:
                k_int = gauss_curvature_intrinsic(surface, s, t, chart_tol=ctx.chart_tol)
            except ChartError:
                k_int = None
            records.append({
                "s": s, "t": t, "K": k_ext, "K_intrinsic": k_int,
                "K_diff": None if k_int is None else abs(k_ext - k_int),
                "H": list(mean_curvature(sfd)), "commutator_norm": normal_commutator(sfd),
                "chart_ok": k_int is not None,
            })
    summary = {
        "max_abs_K": _max(r["K"] for r in records),
        "max_abs_K_intrinsic": _max(r["K_intrinsic"] for r in records),
        "max_K_diff": _max(r["K_diff"] for r in records),
        "max_commutator_norm": _max(r["commutator_norm"] for r in records),
        "max_abs_H": _max(float(np.linalg.norm(r["H"])) for r in records),
        "chart_failures": sum(not r["chart_ok"] for r in records),
    }
    return {"tool": _tool(), "command": "invariants", "config": cfg.echo(), "points": records, "summary": summary}


def cmd_invariants(cfg: RunConfig) -> int:
    surface = cfg.build_surface()
    doc = invariants_document(cfg, surface, cfg.context())
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_report(cfg.output_dir / "invariants.json", doc)
    summ = doc["summary"]
    print(
        f"max|K|={_fmt_opt(summ['max_abs_K'])}  max|K_ext-K_int|={_fmt_opt(summ['max_K_diff'])}  "
        f"max|[S3,S4]|={_fmt_opt(summ['max_commutator_norm'])}  chart_failures={summ['chart_failures']}"
    )
    return EXIT_OK


def projection_matrix(spec: dict) -> np.ndarray:
    """3x4 matrix mapping R^4 to the projected R^3."""
    if "drop" in spec:
        keep = [i for i in range(4) if i != spec["drop"] - 1]
        return np.eye(4)[keep]
    d = np.asarray(spec["direction"], float)
    return np.array(complete_basis([d]))


def degenerate_cells(points4: np.ndarray, P: np.ndarray, ratio: float = 1e-6) -> int:
    """Cells whose projected area collapses relative to their area in R^4."""
    n_s, n_t = points4.shape[:2]
    bad = 0
    for a in range(n_s - 1):
        for b in range(n_t - 1):
            u = points4[a + 1, b] - points4[a, b]
            v = points4[a, b + 1] - points4[a, b]
            area4 = np.sqrt(max((u @ u) * (v @ v) - (u @ v) ** 2, 0.0))
            area3 = np.linalg.norm(np.cross(P @ u, P @ v))
            if area3 <= ratio * area4:
                bad += 1
    return bad


def cmd_export_mesh(cfg: RunConfig) -> int:
    surface = cfg.build_surface()
    n_s, n_t = cfg.grid
    s_nodes, t_nodes, points = _sample_grid(surface, n_s, n_t)
    P = projection_matrix(cfg.projection)
    vertices = points.reshape(-1, 4) @ P.T
    faces = grid_faces(n_s, n_t)
    bad = degenerate_cells(points, P)
    if bad > 0.5 * (n_s - 1) * (n_t - 1):
        print(f"warning: projection is degenerate on {bad} of {(n_s - 1) * (n_t - 1)} cells", file=sys.stderr)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_obj(cfg.output_dir / "mesh.obj", vertices, faces)
    write_points_csv(cfg.output_dir / "mesh_vertices.csv", s_nodes, t_nodes, points)
    print(f"wrote {len(vertices)} vertices and {len(faces)} triangles to {cfg.output_dir / 'mesh.obj'}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "verify": cmd_verify,
    "invariants": cmd_invariants,
    "export-mesh": cmd_export_mesh,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpd4", description="CPD surfaces in Euclidean 4-space")
    parser.add_argument("--version", action="version", version=f"cpd4 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (default: config 'output.dir' or the config's folder)")
        p.add_argument("--grid", help="grid resolution NxM (at least 8 per axis)")
        p.add_argument("--tol", type=float, help="off-diagonal tolerance for the CPD verdict")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, grid_override=args.grid, tol_override=args.tol, out_override=args.out)
        return COMMANDS[args.command](cfg)
    except (ConfigError, RecipeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
