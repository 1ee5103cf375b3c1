"""Checkable instances of the eigenvalue inequalities, plus sweeps.

Every ``check_*`` function returns a :class:`BoundReport` whose ``pass`` flag is
a pure function of ``lhs``, ``rhs``, ``relation`` and ``tol``. Discrete
eigenvalues from the conforming FEM sit above the continuum values, so upper
bound checks use the raw discrete value with zero tolerance, while lower
bound checks demand a margin of three times the observed change between the
mesh ``h`` and its uniform refinement.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import geometry
from .fem2d import Eigenpair, SolverOptions, nodal_domains, rayleigh_lambda, rayleigh_mu
from .geometry import ConvexPolygon, make_rectangle, make_rhombus
from .mesh import TriMesh, refine, triangulate
from .oned import Exponents, ball_volume, pi_p, radial_dirichlet, radial_dirichlet_pq
from .report import BoundReport, SweepTable

__all__ = [
    "default_h",
    "min_width",
    "solve",
    "check_main",
    "check_measure",
    "check_pw",
    "check_pq_upper",
    "check_pq_lower",
    "check_comparison",
    "check_debole",
    "sharpness_sweep",
    "collapse_sweep",
    "shape_search",
    "ShapeSearchResult",
    "FAMILIES",
]

DIMENSION = 2


def min_width(poly: ConvexPolygon) -> float:
    """Minimal width: smallest edge-supported strip containing the polygon."""
    a, b = poly.edges
    e = b - a
    n = np.column_stack([-e[:, 1], e[:, 0]]) / np.linalg.norm(e, axis=1)[:, None]
    return float(np.min(np.max(np.abs((poly.vertices[None] - a[:, None]) @ n[..., None])[..., 0],
                               axis=1)))


def default_h(poly: ConvexPolygon, per_diameter: int = 20, per_width: int = 6) -> float:
    """Mesh size resolving both the diameter and the minimal width."""
    return min(poly.diameter / per_diameter, min_width(poly) / per_width)


@lru_cache(maxsize=64)
def _mesh(poly: ConvexPolygon, h: float, levels: int = 0) -> TriMesh:
    m = triangulate(poly, h)
    for _ in range(levels):
        m = refine(m)
    return m


@lru_cache(maxsize=256)
def _solve(kind, poly, h, levels, p, q, opts):
    mesh = _mesh(poly, h, levels)
    fn = rayleigh_mu if kind == "mu" else rayleigh_lambda
    return fn(mesh, p, q, opts)


def solve(kind: str, poly: ConvexPolygon, p: float, q: float, h: float | None = None,
          levels: int = 0, opts: SolverOptions | None = None) -> Eigenpair:
    """Cached ``mu`` or ``lambda`` solve on ``triangulate(poly, h)`` refined ``levels`` times."""
    if kind not in ("mu", "lambda"):
        raise ValueError(f"kind must be 'mu' or 'lambda', got {kind!r}")
    h = default_h(poly) if h is None else float(h)
    return _solve(kind, poly, h, int(levels), float(p), float(q), opts or SolverOptions())


def _context(poly, p, q, h, pair: Eigenpair | None = None, **extra) -> dict:
    ctx = {"polygon": poly.describe(), "diameter": poly.diameter, "area": poly.area,
           "p": p, "q": q, "h": h}
    if pair is not None:
        ctx["n_vertices"] = pair.meta["n_vertices"]
        ctx["restart_values"] = pair.meta["restart_values"]
        ctx["constraint_residual"] = pair.constraint_residual
    ctx.update(extra)
    return ctx


def _ball_lambda(p: float, q: float, radius: float) -> float:
    if q == p:
        return radial_dirichlet(p, DIMENSION, radius).eigenvalue
    return radial_dirichlet_pq(p, q, DIMENSION, radius).eigenvalue


def check_main(poly: ConvexPolygon, p: float, h: float | None = None,
               opts: SolverOptions | None = None) -> BoundReport:
    """``mu_{p,p}(poly) < lambda_{p,p}`` of the ball with the same diameter."""
    h = default_h(poly) if h is None else h
    pair = solve("mu", poly, p, p, h, opts=opts)
    rhs = _ball_lambda(p, p, poly.diameter / 2)
    return BoundReport("main", pair.value, rhs, "<", 0.0, _context(poly, p, p, h, pair))


def check_measure(poly: ConvexPolygon, p: float, h: float | None = None,
                  opts: SolverOptions | None = None) -> BoundReport:
    """``mu_{p,p}(poly) < lambda_{p,p}(B_1) (|B_1| / |poly|)^(p/2)``."""
    h = default_h(poly) if h is None else h
    pair = solve("mu", poly, p, p, h, opts=opts)
    rhs = _ball_lambda(p, p, 1.0) * (ball_volume(DIMENSION) / poly.area) ** (p / DIMENSION)
    return BoundReport("measure", pair.value, rhs, "<", 0.0, _context(poly, p, p, h, pair))


def _refined_pair(kind, poly, p, q, h, opts):
    coarse = solve(kind, poly, p, q, h, 0, opts)
    fine = solve(kind, poly, p, q, h, 1, opts)
    return coarse, fine, abs(coarse.value - fine.value)


def check_pw(poly: ConvexPolygon, p: float, h: float | None = None,
             opts: SolverOptions | None = None) -> BoundReport:
    """``mu_{p,p}(poly) > (pi_p / diam)^p`` with margin above ``3 |mu_h - mu_{h/2}|``."""
    h = default_h(poly) if h is None else h
    coarse, fine, err = _refined_pair("mu", poly, p, p, h, opts)
    rhs = (pi_p(p) / poly.diameter) ** p
    ctx = _context(poly, p, p, h, fine, coarse_value=coarse.value, discretization_error=err)
    return BoundReport("pw", fine.value, rhs, ">", 3.0 * err, ctx)


def check_pq_upper(poly: ConvexPolygon, p: float, q: float, h: float | None = None,
                   opts: SolverOptions | None = None) -> BoundReport:
    """``mu_{p,q}(poly) < lambda_{p,q}`` of the ball with the same diameter, for ``p < q``."""
    ex = Exponents(p, q, DIMENSION)
    if not p < q:
        raise ValueError(f"need p < q, got p={p}, q={q}")
    h = default_h(poly) if h is None else h
    pair = solve("mu", poly, p, q, h, opts=opts)
    rhs = _ball_lambda(p, q, poly.diameter / 2)
    return BoundReport("pq_upper", pair.value, rhs, "<", 0.0,
                       _context(poly, p, q, h, pair, scaling_exponent=ex.scaling_exponent))


def pq_lower_bound(poly: ConvexPolygon, p: float, q: float, variant: str = "measure") -> float:
    """Lower bound on ``mu_{p,q}`` for ``q < p``.

    ``"measure"``: ``(pi_p/diam)^p |poly|^(1-p/q)``.
    ``"diameter"``: the same with ``|poly|`` replaced through the isodiametric
    inequality, ``(pi_p/diam)^p |B|^(1-p/q)`` with ``B`` the ball of equal diameter.
    """
    d = poly.diameter
    base = (pi_p(p) / d) ** p
    if variant == "measure":
        return base * poly.area ** (1 - p / q)
    if variant == "diameter":
        return base * (ball_volume(DIMENSION) * (d / 2) ** DIMENSION) ** (1 - p / q)
    raise ValueError(f"unknown variant {variant!r}")


def check_pq_lower(poly: ConvexPolygon, p: float, q: float, h: float | None = None,
                   opts: SolverOptions | None = None, variant: str = "measure") -> BoundReport:
    """``mu_{p,q}(poly) >= pq_lower_bound`` for ``q < p``, margin above 3x the mesh change."""
    Exponents(p, q, DIMENSION)
    if not q < p:
        raise ValueError(f"need q < p, got p={p}, q={q}")
    h = default_h(poly) if h is None else h
    coarse, fine, err = _refined_pair("mu", poly, p, q, h, opts)
    rhs = pq_lower_bound(poly, p, q, variant)
    ctx = _context(poly, p, q, h, fine, coarse_value=coarse.value, discretization_error=err,
                   variant=variant)
    return BoundReport(f"pq_lower_{variant}", fine.value, rhs, ">", 3.0 * err, ctx)


def check_comparison(mesh: TriMesh, p: float, s: float, q: float,
                     opts: SolverOptions | None = None, rtol: float = 1e-6) -> list[BoundReport]:
    """``mu_{p,q} <= |Omega|^(p/s - p/q) mu_{p,s}`` for ``s <= q``, and the same for lambda.

    Both sides live on the same mesh. The ``q`` solve is also started from
    the ``s`` minimiser, so the computed ``q`` value never exceeds the one the
    Hoelder argument gives for that field. ``rtol`` covers the line-search
    tolerance.
    """
    Exponents(p, s, DIMENSION)
    Exponents(p, q, DIMENSION)
    if not s <= q:
        raise ValueError(f"need s <= q, got s={s}, q={q}")
    factor = mesh.area ** (p / s - p / q)
    out = []
    for name, fn in (("mu", rayleigh_mu), ("lambda", rayleigh_lambda)):
        low = fn(mesh, p, s, opts)
        high = low if s == q else fn(mesh, p, q, opts, seeds=[low.field])
        rhs = factor * low.value
        ctx = {"p": p, "s": s, "q": q, "h": mesh.h, "area": mesh.area, "factor": factor,
               "n_vertices": mesh.n_vertices}
        out.append(BoundReport(f"comparison_{name}", high.value, rhs, "<=", rtol * rhs, ctx))
    return out


def check_debole(poly: ConvexPolygon, p: float, q: float, h: float | None = None,
                 opts: SolverOptions | None = None) -> BoundReport:
    """``mu_{p,q} < lambda_{p,q}`` for ``p <= q``, with the nodal summary in the context.

    ``context["all_touch_boundary"]`` records whether every sign component of
    the Neumann eigenfunction reaches the boundary.
    """
    Exponents(p, q, DIMENSION)
    if not p <= q:
        raise ValueError(f"need p <= q, got p={p}, q={q}")
    h = default_h(poly) if h is None else h
    mu = solve("mu", poly, p, q, h, opts=opts)
    lam = solve("lambda", poly, p, q, h, opts=opts)
    comps = nodal_domains(_mesh(poly, h, 0), mu.field)
    nodal = [{"id": c.id, "sign": c.sign, "size": c.size, "touches_boundary": c.touches_boundary}
             for c in comps]
    ctx = _context(poly, p, q, h, mu, nodal_components=nodal,
                   all_touch_boundary=all(c.touches_boundary for c in comps))
    return BoundReport("debole", mu.value, lam.value, "<", 0.0, ctx)


def _map(fn, items, jobs):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _sharp_row(args):
    p, d, k, h, opts = args
    poly = make_rhombus(d, k)
    pair = solve("mu", poly, p, p, h, opts=opts)
    pw = (pi_p(p) / poly.diameter) ** p
    return pair.value, pair.meta["n_vertices"], pw


def sharpness_sweep(p: float, d: float, ks, h=None, opts: SolverOptions | None = None,
                    jobs: int = 1) -> SweepTable:
    """``mu_{p,p}`` on rhombi of diagonals ``d`` and ``d/k`` against the ball limit.

    ``h`` is either ``None`` (``d/(16k)`` per row), a number, or one number
    per ``k``; every row must satisfy ``h <= d/(8k)``.
    """
    ks = [float(k) for k in ks]
    if any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("ks must be increasing and at least 1")
    if h is None:
        hs = [d / (16 * k) for k in ks]
    elif np.ndim(h) == 0:
        hs = [float(h)] * len(ks)
    else:
        hs = [float(x) for x in h]
    for k, hk in zip(ks, hs):
        if hk > d / (8 * k) * (1 + 1e-12):
            raise ValueError(f"h={hk} does not resolve k={k:g}; need h <= {d / (8 * k):.6g}")
    limit = radial_dirichlet(p, DIMENSION, d / 2).eigenvalue
    res = _map(_sharp_row, [(p, d, k, hk, opts) for k, hk in zip(ks, hs)], jobs)
    rows = []
    for k, hk, (val, nv, pw) in zip(ks, hs, res):
        rows.append((k, val, limit, limit - val, hk, nv, bool(val < limit), bool(val > pw)))
    vals = [r[1] for r in rows]
    flags = {
        "increasing": all(b > a for a, b in zip(vals, vals[1:])),
        "below_limit": all(r[6] for r in rows),
        "above_pw": all(r[7] for r in rows),
    }
    return SweepTable("k", rows, ("h", "n_vertices", "main_pass", "pw_pass"), flags,
                      {"p": p, "d": d})


def _collapse_row(args):
    p, q, w, h, opts = args
    poly = make_rectangle(1.0, w)
    pair = solve("mu", poly, p, q, h, opts=opts)
    extra = math.nan
    if q > p:
        # Hoelder comparison with the p = q eigenvalue on the same mesh
        extra = poly.area ** (1 - p / q) * solve("mu", poly, p, p, h, opts=opts).value
    return pair.value, pair.meta["n_vertices"], extra


def collapse_sweep(p: float, q: float, widths, h=None, opts: SolverOptions | None = None,
                   jobs: int = 1) -> SweepTable:
    """``mu_{p,q}`` on ``1 x w`` rectangles as the width shrinks.

    The limit column is the bound each row is compared with: the comparison
    bound ``|Omega|^(1-p/q) mu_{p,p}`` for ``q > p`` (value must sit below), the
    lower bound ``pq_lower_bound`` for ``q < p`` (value must sit above), and
    ``pi_p^p`` for ``q = p``.
    """
    Exponents(p, q, DIMENSION)
    widths = [float(w) for w in widths]
    if any(b >= a for a, b in zip(widths, widths[1:])):
        raise ValueError("widths must be decreasing")
    if h is None:
        hs = [min(w / 6, 1 / 20) for w in widths]
    elif np.ndim(h) == 0:
        hs = [float(h)] * len(widths)
    else:
        hs = [float(x) for x in h]
    res = _map(_collapse_row, [(p, q, w, hw, opts) for w, hw in zip(widths, hs)], jobs)
    rows = []
    for w, hw, (val, nv, hold) in zip(widths, hs, res):
        poly = make_rectangle(1.0, w)
        if q > p:
            limit = hold
            ok = val <= limit * (1 + 1e-6)
        elif q < p:
            limit = pq_lower_bound(poly, p, q)
            ok = val >= limit
        else:
            limit = pi_p(p) ** p
            ok = True
        rows.append((w, val, limit, val - limit, hw, nv, bool(ok)))
    vals = [r[1] for r in rows]
    flags = {"bounds": all(r[6] for r in rows)}
    ctx = {"p": p, "q": q}
    if q > p:
        flags["decreasing"] = all(b < a for a, b in zip(vals, vals[1:]))
    elif q < p:
        flags["increasing"] = all(b > a for a, b in zip(vals, vals[1:]))
        decades = math.log10(widths[0] / widths[-1]) if len(widths) > 1 else 0.0
        ratio = vals[-1] / vals[0]
        ctx["growth_ratio"] = ratio
        ctx["decades"] = decades
        if decades >= 1:
            flags["growth_per_decade"] = ratio ** (1 / decades) > 2
    else:
        ctx["relative_gap_last"] = abs(vals[-1] / (pi_p(p) ** p) - 1)
        flags["near_interval_limit"] = ctx["relative_gap_last"] < 0.15
    return SweepTable("width", rows, ("h", "n_vertices", "bound_pass"), flags, ctx)


def _hexagon(c: float) -> ConvexPolygon:
    return geometry.make_hexagon(1.0, 1.0, c)


FAMILIES = {
    # name: (builder, default parameter grid, continuous?)
    "regular": (lambda n: geometry.make_regular_polygon(int(n), 1.0), None, False),
    "rhombus": (lambda k: make_rhombus(2.0, k), (1.0, 4.0), True),
    "rectangle": (lambda w: make_rectangle(1.0, w), (0.1, 1.0), True),
    "hexagon": (_hexagon, (0.05, 0.95), True),
}


@dataclass
class ShapeSearchResult:
    """Best member found by an exploratory search; never a certified optimum."""

    family: str
    best_param: float
    best_value: float
    evaluations: list = field(default_factory=list)
    certified: bool = False


def shape_objective(poly: ConvexPolygon, p: float, q: float, h=None,
                    opts: SolverOptions | None = None) -> float:
    """Dilation-invariant ``mu_{p,q}(poly) diam^(p + 2p/q - 2)``."""
    e = Exponents(p, q, DIMENSION).scaling_exponent
    return solve("mu", poly, p, q, h, opts=opts).value * poly.diameter ** e


def shape_search(p: float, q: float, family="regular", budget: int = 12, params=None,
                 scale: float = 1.0, opts: SolverOptions | None = None) -> ShapeSearchResult:
    """Maximise the scale-free objective over a one-parameter convex family.

    ``family`` is a name in ``FAMILIES`` or a callable ``param -> ConvexPolygon``
    (then ``params`` is required). Discrete families are scanned exhaustively
    up to ``budget`` members; continuous ones get a uniform grid on half the
    budget and golden-section refinement around the best grid point.
    """
    Exponents(p, q, DIMENSION)
    if not p < q:
        raise ValueError(f"need p < q, got p={p}, q={q}")
    if callable(family):
        if params is None:
            raise ValueError("params are required for a callable family")
        build, name, continuous, grid = family, getattr(family, "__name__", "custom"), False, params
    else:
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        build, span, continuous = FAMILIES[family]
        name = family
        if params is not None:
            grid, continuous = list(params), False
        elif continuous:
            grid = list(np.linspace(span[0], span[1], max(budget // 2, 2)))
        else:
            grid = list(range(3, 3 + budget))
    evals: dict = {}

    def objective(t):
        t = float(t)
        if t not in evals:
            poly = build(t).scaled(scale)
            evals[t] = shape_objective(poly, p, q, opts=opts)
        return evals[t]

    for t in grid:
        objective(t)
    if continuous and len(grid) > 2:
        i = int(np.argmax([evals[float(t)] for t in grid]))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        g = (math.sqrt(5) - 1) / 2
        for _ in range(4 * budget):
            if len(evals) >= budget:
                break
            a, b = hi - g * (hi - lo), lo + g * (hi - lo)
            if objective(a) >= objective(b):
                hi = b
            else:
                lo = a
    best = max(evals, key=lambda t: evals[t])
    return ShapeSearchResult(name, best, evals[best], sorted(evals.items()))
