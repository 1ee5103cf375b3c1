"""Command-line front end: ``compute``, ``verify`` and ``sweep``.

Options come from flags and, optionally, a JSON config file given with
``--config``; flags win over file values. Exit codes: 0 when every assertion
passes, 1 for configuration errors, 2 when a solver fails to converge and
3 when a computation finished but an asserted inequality or trend failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bounds, fem2d, geometry, oned
from .mesh import MeshError, triangulate
from .oned import ShootingError, StagnationError
from .report import fmt, reports_to_csv, reports_to_jsonl

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_FAILED = 0, 1, 2, 3

DEFAULTS = {
    "shape": "square",
    "polygon": None,
    "side": 1.0,
    "length": 1.0,
    "width": 0.5,
    "d": 2.0,
    "k": 1.0,
    "n": None,
    "radius": 1.0,
    "p": 2.0,
    "q": None,
    "s": None,
    "h": None,
    "dim": 2,
    "grid": 2048,
    "restarts": 4,
    "gtol": 1e-8,
    "eps_schedule": "1e-2,1e-3,1e-4",
    "seed": 0,
    "variant": "measure",
    "ks": "1,2,4,8",
    "widths": "0.2,0.1,0.05",
    "family": "regular",
    "budget": 12,
    "out": None,
    "csv": None,
    "field": None,
    "jobs": None,
}


class ConfigError(ValueError):
    pass


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def _add_common(sp: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    sp.add_argument("--config", default=S, help="JSON file with option values")
    g = sp.add_argument_group("domain")
    g.add_argument("--shape", default=S, help="square, rectangle, rhombus, regular, hex, disc")
    g.add_argument("--polygon", default=S, help="polygon file, one 'x y' vertex per line")
    g.add_argument("--side", type=float, default=S)
    g.add_argument("--length", type=float, default=S)
    g.add_argument("--width", type=float, default=S)
    g.add_argument("--d", type=float, default=S, help="rhombus long diagonal")
    g.add_argument("--k", type=float, default=S, help="rhombus aspect ratio")
    g.add_argument("--n", type=int, default=S, help="number of sides")
    g.add_argument("--radius", type=float, default=S)
    e = sp.add_argument_group("problem")
    e.add_argument("--p", type=float, default=S)
    e.add_argument("--q", type=float, default=S, help="defaults to p")
    e.add_argument("--s", type=float, default=S, help="smaller exponent for 'comparison'")
    e.add_argument("--dim", type=int, default=S)
    e.add_argument("--h", type=float, default=S, help="target mesh edge length")
    e.add_argument("--grid", type=int, default=S, help="1D grid size for 'weighted'")
    o = sp.add_argument_group("solver")
    o.add_argument("--restarts", type=int, default=S)
    o.add_argument("--gtol", type=float, default=S)
    o.add_argument("--eps-schedule", dest="eps_schedule", default=S)
    o.add_argument("--seed", type=int, default=S)
    o.add_argument("--jobs", type=int, default=S,
                   help="parallel rows (default: $NEUMANN_SHARP_JOBS or 1)")
    w = sp.add_argument_group("output")
    w.add_argument("--out", default=S, help="JSON (compute) or JSON-lines/CSV (verify, sweep) path")
    w.add_argument("--csv", default=S, help="CSV summary path")
    w.add_argument("--field", default=S, help="field or profile CSV path (compute)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neumann-sharp",
        description="p-Laplacian Neumann/Dirichlet eigenvalues on convex polygons and balls.")
    sub = parser.add_subparsers(dest="command", required=True)
    c = sub.add_parser("compute", help="compute one eigenvalue or constant")
    c.add_argument("what", choices=["mu", "lambda", "pip", "ball", "weighted"])
    _add_common(c)
    v = sub.add_parser("verify", help="run one inequality check")
    v.add_argument("check", help="main, measure, pw, pq_upper, pq_lower, comparison, debole")
    v.add_argument("--variant", default=argparse.SUPPRESS, choices=["measure", "diameter"])
    _add_common(v)
    s = sub.add_parser("sweep", help="run a parameter sweep")
    s.add_argument("kind", choices=["sharpness", "collapse", "shape"])
    s.add_argument("--ks", default=argparse.SUPPRESS)
    s.add_argument("--widths", default=argparse.SUPPRESS)
    s.add_argument("--family", default=argparse.SUPPRESS)
    s.add_argument("--budget", type=int, default=argparse.SUPPRESS)
    _add_common(s)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    given = vars(args)
    if "config" in given:
        try:
            data = json.loads(Path(given["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {given['config']!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    cfg.update({k: v for k, v in given.items() if k != "config"})
    if cfg["q"] is None:
        cfg["q"] = cfg["p"]
    if cfg["jobs"] is None:
        try:
            cfg["jobs"] = int(os.environ.get("NEUMANN_SHARP_JOBS", "1"))
        except ValueError as exc:
            raise ConfigError("NEUMANN_SHARP_JOBS must be an integer") from exc
    return cfg


def polygon_from(cfg: dict) -> geometry.ConvexPolygon:
    if cfg.get("polygon"):
        return geometry.read_polygon(cfg["polygon"])
    shape = cfg["shape"]
    params = {"side": cfg["side"], "length": cfg["length"], "width": cfg["width"],
              "d": cfg["d"], "k": cfg["k"], "n": cfg["n"], "radius": cfg["radius"]}
    params = {k: v for k, v in params.items() if v is not None}
    return geometry.named_shape(shape, **params)


def solver_options(cfg: dict) -> fem2d.SolverOptions:
    return fem2d.SolverOptions(restarts=int(cfg["restarts"]), gtol=float(cfg["gtol"]),
                               eps_schedule=tuple(_floats(cfg["eps_schedule"])),
                               seed=int(cfg["seed"]))


def _write(path, text: str) -> None:
    if path:
        Path(path).write_text(text)


def _dump(obj) -> str:
    return json.dumps(fmt(obj), sort_keys=True)


def cmd_compute(cfg: dict, out=None) -> int:
    out = out or sys.stdout
    what = cfg["what"]
    p, q = float(cfg["p"]), float(cfg["q"])
    if what == "pip":
        value = oned.pi_p(p)
        record = {"quantity": "pi_p", "p": p, "value": value}
    elif what == "ball":
        N = int(cfg["dim"])
        oned.Exponents(p, q, N)
        prof = (oned.radial_dirichlet(p, N, cfg["radius"]) if q == p
                else oned.radial_dirichlet_pq(p, q, N, cfg["radius"]))
        value = prof.eigenvalue
        _write(cfg["field"], prof.to_csv())
        record = {"quantity": "ball_lambda", "p": p, "q": q, "dim": N,
                  "radius": cfg["radius"], "value": value}
    elif what == "weighted":
        N = int(cfg["dim"])
        res = oned.weighted_neumann_1d(p, N, cfg["d"], n=int(cfg["grid"]), seed=int(cfg["seed"]))
        value = res.eta
        _write(cfg["field"], res.to_csv())
        record = {"quantity": "weighted_neumann_1d", "p": p, "dim": N, "d": cfg["d"],
                  "n": int(cfg["grid"]), "value": value,
                  "constraint_residual": res.constraint_residual}
    else:
        poly = polygon_from(cfg)
        h = bounds.default_h(poly) if cfg["h"] is None else float(cfg["h"])
        mesh = triangulate(poly, h)
        fn = fem2d.rayleigh_mu if what == "mu" else fem2d.rayleigh_lambda
        pair = fn(mesh, p, q, solver_options(cfg))
        value = pair.value
        _write(cfg["field"], pair.field_csv())
        record = json.loads(pair.to_json())
        record["polygon"] = poly.describe()
    print(f"{value:.12g}", file=out)
    _write(cfg["out"], _dump(record) + "\n")
    return EXIT_OK


CHECKS = ("main", "measure", "pw", "pq_upper", "pq_lower", "comparison", "debole")


def cmd_verify(cfg: dict, out=None) -> int:
    out = out or sys.stdout
    check = cfg["check"]
    if check not in CHECKS:
        raise ConfigError(f"unknown check {check!r}; choose from {', '.join(CHECKS)}")
    poly = polygon_from(cfg)
    p, q = float(cfg["p"]), float(cfg["q"])
    h = bounds.default_h(poly) if cfg["h"] is None else float(cfg["h"])
    opts = solver_options(cfg)
    extra_ok = True
    if check == "main":
        reports = [bounds.check_main(poly, p, h, opts)]
    elif check == "measure":
        reports = [bounds.check_measure(poly, p, h, opts)]
    elif check == "pw":
        reports = [bounds.check_pw(poly, p, h, opts)]
    elif check == "pq_upper":
        reports = [bounds.check_pq_upper(poly, p, q, h, opts)]
    elif check == "pq_lower":
        reports = [bounds.check_pq_lower(poly, p, q, h, opts, cfg["variant"])]
    elif check == "comparison":
        s = p if cfg["s"] is None else float(cfg["s"])
        reports = bounds.check_comparison(triangulate(poly, h), p, s, q, opts)
    else:
        reports = [bounds.check_debole(poly, p, q, h, opts)]
        extra_ok = reports[0].context["all_touch_boundary"]
    text = reports_to_jsonl(reports)
    out.write(text)
    _write(cfg["out"], text)
    _write(cfg["csv"], reports_to_csv(reports))
    return EXIT_OK if all(r.passed for r in reports) and extra_ok else EXIT_FAILED


def cmd_sweep(cfg: dict, out=None) -> int:
    out = out or sys.stdout
    kind = cfg["kind"]
    p, q = float(cfg["p"]), float(cfg["q"])
    opts = solver_options(cfg)
    jobs = int(cfg["jobs"])
    if kind == "sharpness":
        table = bounds.sharpness_sweep(p, float(cfg["d"]), _floats(cfg["ks"]), cfg["h"], opts, jobs)
        text = table.to_csv()
        ok = table.ok
    elif kind == "collapse":
        table = bounds.collapse_sweep(p, q, _floats(cfg["widths"]), cfg["h"], opts, jobs)
        text = table.to_csv()
        ok = table.ok
    else:
        res = bounds.shape_search(p, q, cfg["family"], int(cfg["budget"]), opts=opts)
        lines = ["param,objective"] + [f"{fmt(float(t))},{fmt(float(v))}" for t, v in res.evaluations]
        text = "\n".join(lines) + "\n"
        out.write(f"# best {res.family} param={fmt(float(res.best_param))} "
                  f"objective={fmt(float(res.best_value))} (not certified)\n")
        ok = True
    out.write(text)
    _write(cfg["out"], text)
    _write(cfg["csv"], text)
    return EXIT_OK if ok else EXIT_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        handler = {"compute": cmd_compute, "verify": cmd_verify, "sweep": cmd_sweep}[cfg["command"]]
        return handler(cfg)
    except (StagnationError, ShootingError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, StagnationError):
            diag["best_value"] = float(exc.value)
        print(_dump(diag), file=sys.stdout)
        return EXIT_SOLVER
    except (ConfigError, MeshError, ValueError, OSError) as exc:
        print(_dump({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
