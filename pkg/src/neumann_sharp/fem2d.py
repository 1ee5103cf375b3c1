"""P1 finite-element Rayleigh quotients on convex polygons.

``rayleigh_mu`` minimises

    int |grad v|^p dx / min_t (int |v - t|^q dx)^(p/q)

over continuous piecewise-linear ``v`` (the inner minimisation over ``t``
replaces the nonlinear constraint ``int |v|^(q-2) v = 0``), and
``rayleigh_lambda`` minimises ``int |grad v|^p / (int |v|^q)^(p/q)`` over
fields vanishing on the boundary. Gradients are constant per triangle, so
the numerator is exact; the ``q``-integral uses a 7-point degree-5 rule.

The descent runs on the logarithm of the quotient with a smoothed gradient
norm ``sqrt(|grad v|^2 + eps^2)``; ``eps`` is driven down a continuation
schedule and the reported value is always the plain quotient of the final
field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy import optimize
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from . import geometry, oned
from .geometry import ConvexPolygon
from .mesh import TriMesh, refine, triangulate
from .oned import Exponents, StagnationError, t_center
from .report import fmt

__all__ = [
    "SolverOptions",
    "Eigenpair",
    "StagnationError",
    "rayleigh_mu",
    "rayleigh_lambda",
    "rayleigh_quotient",
    "nodal_domains",
    "NodalComponent",
    "two_cap_quotient",
    "triangulate",
    "refine",
    "TriMesh",
]

# Dunavant degree-5 rule: barycentric points and weights summing to 1
_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
QUAD_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
])
QUAD_W = np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3)


@dataclass(frozen=True)
class SolverOptions:
    """Knobs of the quotient descent.

    ``eps_schedule`` is relative to the RMS gradient of the unit-amplitude
    starting field of each stage. ``restarts`` counts the total number of
    seeds: the coordinate seeds first, then random ones.
    """

    restarts: int = 4
    eps_schedule: tuple = (1e-2, 1e-3, 1e-4)
    gtol: float = 1e-8
    maxiter: int = 20_000
    seed: int = 0
    precondition: bool = True

    def as_dict(self) -> dict:
        return {"restarts": self.restarts, "eps_schedule": list(self.eps_schedule),
                "gtol": self.gtol, "maxiter": self.maxiter, "seed": self.seed,
                "precondition": self.precondition}


@dataclass(frozen=True)
class Eigenpair:
    """Best quotient found, its field (t-centred for Neumann) and diagnostics."""

    value: float
    field: np.ndarray
    constraint_residual: float
    grad_norm: float
    kind: str
    p: float
    q: float
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = {"kind": self.kind, "value": self.value, "p": self.p, "q": self.q,
             "constraint_residual": self.constraint_residual, "grad_norm": self.grad_norm,
             "meta": self.meta}
        return json.dumps(fmt(d), sort_keys=True)

    def field_csv(self) -> str:
        return "vertex,value\n" + "".join(f"{i},{x:.12g}\n" for i, x in enumerate(self.field))


class _Assembly:
    """Mesh-dependent operators shared by all quotients on one mesh."""

    def __init__(self, mesh: TriMesh):
        pts, tri = mesh.vertices, mesh.triangles
        self.mesh = mesh
        nv, nt = len(pts), len(tri)
        a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
        area2 = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
        self.area = 0.5 * area2
        # grad of the hat function at vertex k is rot90(opposite edge) / (2 area)
        gx = np.column_stack([b[:, 1] - c[:, 1], c[:, 1] - a[:, 1], a[:, 1] - b[:, 1]]) / area2[:, None]
        gy = np.column_stack([c[:, 0] - b[:, 0], a[:, 0] - c[:, 0], b[:, 0] - a[:, 0]]) / area2[:, None]
        rows = np.repeat(np.arange(nt), 3)
        self.Gx = sp.csr_matrix((gx.ravel(), (rows, tri.ravel())), shape=(nt, nv))
        self.Gy = sp.csr_matrix((gy.ravel(), (rows, tri.ravel())), shape=(nt, nv))
        nq = len(QUAD_W)
        qrows = np.arange(nt * nq)
        self.P = sp.csr_matrix(
            (np.tile(QUAD_BARY, (nt, 1)).ravel(),
             (np.repeat(qrows, 3), np.repeat(tri, nq, axis=0).ravel())),
            shape=(nt * nq, nv))
        self.W = (self.area[:, None] * QUAD_W[None, :]).ravel()
        self.Pt = self.P.T.tocsr()
        self.Gxt = self.Gx.T.tocsr()
        self.Gyt = self.Gy.T.tocsr()
        # P1 stiffness and lumped mass, for preconditioning
        self.K = (self.Gxt @ sp.diags(self.area) @ self.Gx + self.Gyt @ sp.diags(self.area) @ self.Gy).tocsc()
        self.M = np.asarray(self.Pt @ self.W).ravel()


@lru_cache(maxsize=32)
def _assembly(mesh: TriMesh) -> _Assembly:
    return _Assembly(mesh)


def _signed_pow(x, e):
    return np.sign(x) * np.abs(x) ** e


class _Problem:
    """Log-quotient, its gradient, and the inner centring, on the free dofs."""

    def __init__(self, mesh: TriMesh, p: float, q: float, kind: str):
        self.asm = _assembly(mesh)
        self.p, self.q, self.kind = p, q, kind
        nv = mesh.n_vertices
        self.free = np.arange(nv) if kind == "neumann" else np.flatnonzero(~mesh.boundary)
        self.nv = nv
        self.eps = 0.0
        self._t = 0.0

    def full(self, x):
        if self.kind == "neumann":
            return x
        v = np.zeros(self.nv)
        v[self.free] = x
        return v

    def centre(self, V):
        if self.kind != "neumann":
            return 0.0
        self._t = t_center(V, self.asm.W, self.q, t0=self._t)
        return self._t

    def parts(self, v, eps):
        asm, p, q = self.asm, self.p, self.q
        gx, gy = asm.Gx @ v, asm.Gy @ v
        s = gx * gx + gy * gy + eps * eps
        A = asm.area @ s ** (p / 2)
        V = asm.P @ v
        t = self.centre(V)
        D = asm.W @ np.abs(V - t) ** q
        return A, D, gx, gy, s, V, t

    def quotient(self, v, eps=0.0):
        A, D, *_ = self.parts(v, eps)
        return A / D ** (self.p / self.q)

    def fun(self, x):
        asm, p, q = self.asm, self.p, self.q
        v = self.full(x)
        A, D, gx, gy, s, V, t = self.parts(v, self.eps)
        with np.errstate(divide="ignore"):
            c = asm.area * p * np.where(s > 0, s, 1.0) ** (p / 2 - 1)
        c[s == 0] = 0.0
        gA = asm.Gxt @ (c * gx) + asm.Gyt @ (c * gy)
        gD = asm.Pt @ (q * asm.W * _signed_pow(V - t, q - 1))
        g = gA / A - (p / q) * gD / D
        return math.log(A) - (p / q) * math.log(D), g[self.free]


def _lbfgs(fun, x0, apply_h0, gtol, maxiter, memory=12, armijo=1e-4, shrink=0.5):
    """Preconditioned L-BFGS with Armijo backtracking.

    ``apply_h0`` is the initial inverse-Hessian approximation. Returns
    ``(x, f, g, gnorm, iterations, converged)`` with ``gnorm`` the
    ``apply_h0``-norm of the gradient, which is scale free for a
    0-homogeneous objective once multiplied by the field's energy norm.
    """
    x = x0.copy()
    f, g = fun(x)
    S, Y, RHO = [], [], []
    gnorm = math.sqrt(max(g @ apply_h0(g), 0.0))
    it = 0
    while it < maxiter:
        if gnorm <= gtol:
            return x, f, g, gnorm, it, True
        # two-loop recursion
        qv = g.copy()
        alphas = []
        for s, y, rho in zip(reversed(S), reversed(Y), reversed(RHO)):
            a = rho * (s @ qv)
            alphas.append(a)
            qv -= a * y
        r = apply_h0(qv)
        if S:
            r *= (S[-1] @ Y[-1]) / (Y[-1] @ apply_h0(Y[-1]))
        for (s, y, rho), a in zip(zip(S, Y, RHO), reversed(alphas)):
            b = rho * (y @ r)
            r += (a - b) * s
        d = -r
        slope = g @ d
        if slope >= 0:
            S, Y, RHO = [], [], []
            d = -apply_h0(g)
            slope = g @ d
        step = 1.0
        while True:
            xn = x + step * d
            fn, gn = fun(xn)
            if np.isfinite(fn) and fn <= f + armijo * step * slope:
                break
            step *= shrink
            if step < 1e-20:
                return x, f, g, gnorm, it, False
        s, y = xn - x, gn - g
        sy = s @ y
        if sy > 1e-300:
            S.append(s)
            Y.append(y)
            RHO.append(1.0 / sy)
            if len(S) > memory:
                S.pop(0), Y.pop(0), RHO.pop(0)
        x, f, g = xn, fn, gn
        gnorm = math.sqrt(max(g @ apply_h0(g), 0.0))
        it += 1
    return x, f, g, gnorm, it, gnorm <= gtol


def _seeds(mesh: TriMesh, kind: str, opts: SolverOptions) -> list:
    rng = np.random.default_rng(opts.seed)
    x = mesh.vertices - mesh.vertices.mean(axis=0)
    n = mesh.n_vertices
    if kind == "neumann":
        base = [x[:, 0], x[:, 1]]
        extra = [rng.standard_normal(n) for _ in range(max(opts.restarts - 2, 0))]
        return (base + extra)[: max(opts.restarts, 1)]
    bnd = mesh.vertices[mesh.boundary]
    dist = np.min(np.linalg.norm(mesh.vertices[:, None] - bnd[None], axis=-1), axis=1)
    diam = mesh.diameter
    base = [dist, dist * np.exp(x[:, 0] / diam)]
    extra = [dist * rng.uniform(0.0, 1.0, n) for _ in range(max(opts.restarts - 2, 0))]
    return (base + extra)[: max(opts.restarts, 1)]


class _Solver:
    def __init__(self, mesh, p, q, kind, opts):
        self.mesh, self.p, self.q, self.kind, self.opts = mesh, p, q, kind, opts
        self.prob = _Problem(mesh, p, q, kind)
        asm = self.prob.asm
        f = self.prob.free
        diam = mesh.diameter
        self.Kf = asm.K[f][:, f].tocsc()
        if opts.precondition:
            lu = splu((self.Kf + sp.diags(asm.M[f] / diam ** 2)).tocsc())
            self.h0 = lu.solve
        else:
            self.h0 = lambda g: g
        self.area = mesh.area

    def normalise(self, x):
        v = self.prob.full(x)
        if self.kind == "neumann":
            v = v - self.prob.centre(self.prob.asm.P @ v)
        e = math.sqrt(max(v[self.prob.free] @ (self.Kf @ v[self.prob.free]), 1e-300))
        return v[self.prob.free] / e

    def run(self, seed):
        opts, prob = self.opts, self.prob
        x = seed[prob.free].astype(float)
        iters, last = 0, None
        sched = list(opts.eps_schedule) or [0.0]
        for k, eps in enumerate(sched):
            x = self.normalise(x)
            prob.eps = eps / math.sqrt(self.area)
            final = k == len(sched) - 1
            gtol = opts.gtol if final else max(opts.gtol, 1e-6)
            x, f, g, gnorm, it, conv = _lbfgs(prob.fun, x, self.h0, gtol, opts.maxiter)
            iters += it
            last = (gnorm, conv)
        x = self.normalise(x)
        prob.eps = 0.0
        return x, prob.quotient(prob.full(x)), iters, last


def _finish(solver: _Solver, x, best_value, runs, extra) -> Eigenpair:
    prob, mesh = solver.prob, solver.mesh
    p, q = solver.p, solver.q
    asm = prob.asm
    v = prob.full(x)
    t = prob.centre(asm.P @ v)
    u = v - t
    U = asm.P @ u
    u = u / (asm.W @ np.abs(U) ** q) ** (1 / q)
    if solver.kind == "dirichlet" and asm.M @ u < 0:
        u = -u
    U = asm.P @ u
    resid = abs(asm.W @ _signed_pow(U, q - 1)) / (asm.W @ np.abs(U) ** (q - 1))
    value = rayleigh_quotient(mesh, u, p, q, solver.kind)
    prob.eps = 0.0
    gnorm = math.nan
    with np.errstate(divide="ignore", invalid="ignore"):
        _, g = prob.fun(u[prob.free])
        gn = math.sqrt(abs(g @ solver.h0(g))) * math.sqrt(
            u[prob.free] @ (solver.Kf @ u[prob.free]))
        if np.isfinite(gn):
            gnorm = gn
    meta = {
        "p": p, "q": q, "kind": solver.kind, "h": mesh.h, "n_vertices": mesh.n_vertices,
        "eps_schedule": list(solver.opts.eps_schedule), "iterations": [r[2] for r in runs],
        "restart_values": [r[1] for r in runs], "converged": [bool(r[3][1]) for r in runs],
        "centre": t,
    }
    meta.update(extra)
    return Eigenpair(value, u, float(resid), gnorm, solver.kind, p, q, meta)


def _solve(mesh, p, q, kind, opts, seeds=()):
    Exponents(p, q, 2)
    opts = opts or SolverOptions()
    solver = _Solver(mesh, p, q, kind, opts)
    runs = []
    for s in list(_seeds(mesh, kind, opts)) + [np.asarray(s, float) for s in seeds]:
        x, val, it, last = solver.run(s)
        runs.append((x, val, it, last))
    ok = [r for r in runs if r[3][1] and np.isfinite(r[1])]
    if not ok:
        best = min(runs, key=lambda r: r[1] if np.isfinite(r[1]) else math.inf)
        raise StagnationError(
            f"all {len(runs)} restarts stopped above the gradient tolerance "
            f"(best quotient {best[1]:.10g})", solver.prob.full(best[0]), best[1])
    best = min(ok, key=lambda r: r[1])
    return _finish(solver, best[0], best[1], runs, {})


def rayleigh_quotient(mesh: TriMesh, field, p: float, q: float, kind: str = "neumann") -> float:
    """Quotient of ``field`` computed from scratch (``eps = 0``).

    For ``kind="neumann"`` the denominator is ``min_t (int |v-t|^q)^(p/q)``;
    for ``"dirichlet"`` boundary values are ignored (treated as zero).
    """
    prob = _Problem(mesh, p, q, kind)
    v = np.asarray(field, dtype=float)
    if kind == "dirichlet":
        v = prob.full(v[prob.free])
    return float(prob.quotient(v))


def rayleigh_mu(mesh: TriMesh, p: float, q: float, opts: SolverOptions | None = None,
                seeds=()) -> Eigenpair:
    """Discrete first nontrivial Neumann eigenvalue ``mu_{p,q}`` on ``mesh``.

    Runs one descent per seed (coordinate functions, then random fields,
    then any caller-supplied ``seeds``) and keeps the lowest quotient.
    """
    return _solve(mesh, p, q, "neumann", opts, seeds)


def rayleigh_lambda(mesh: TriMesh, p: float, q: float, opts: SolverOptions | None = None,
                    seeds=()) -> Eigenpair:
    """Discrete first Dirichlet eigenvalue ``lambda_{p,q}``; the field is positive."""
    return _solve(mesh, p, q, "dirichlet", opts, seeds)


@dataclass(frozen=True)
class NodalComponent:
    """One connected component of ``{u > 0}`` or ``{u < 0}``."""

    id: int
    sign: int
    size: int
    touches_boundary: bool


def nodal_domains(mesh: TriMesh, field) -> list[NodalComponent]:
    """Sign components of a vertex field under edge adjacency.

    Vertices where the field is exactly zero belong to no component. A
    component touches the boundary iff it contains a boundary vertex.
    """
    u = np.asarray(field, dtype=float)
    if u.shape != (mesh.n_vertices,):
        raise ValueError("field length must equal the vertex count")
    sgn = np.sign(u).astype(int)
    e = mesh.edges
    same = (sgn[e[:, 0]] == sgn[e[:, 1]]) & (sgn[e[:, 0]] != 0)
    e = e[same]
    n = mesh.n_vertices
    adj = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    out = []
    for lab in np.unique(labels[sgn != 0]):
        members = labels == lab
        out.append(NodalComponent(len(out), int(sgn[members][0]), int(members.sum()),
                                  bool(mesh.boundary[members].any())))
    return out


def _fan_points(poly: ConvexPolygon, levels: int):
    """Quadrature nodes and weights on ``poly``: centroid fan, each triangle split ``4**levels`` ways."""
    v = poly.vertices
    c = poly.centroid
    tris = np.stack([np.broadcast_to(c, v.shape), v, np.roll(v, -1, axis=0)], axis=1)
    for _ in range(levels):
        a, b, d = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bd, da = 0.5 * (a + b), 0.5 * (b + d), 0.5 * (d + a)
        tris = np.concatenate([np.stack(t, axis=1) for t in
                               ((a, ab, da), (ab, b, bd), (da, bd, d), (ab, bd, da))])
    a, b, d = tris[:, 0], tris[:, 1], tris[:, 2]
    area = 0.5 * np.abs((b[:, 0] - a[:, 0]) * (d[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (d[:, 0] - a[:, 0]))
    pts = np.einsum("qk,tkd->tqd", QUAD_BARY, tris).reshape(-1, 2)
    w = (area[:, None] * QUAD_W[None, :]).ravel()
    return pts, w


def two_cap_quotient(poly: ConvexPolygon, p: float, arc_segments: int = 64,
                     quad_levels: int = 4, return_details: bool = False):
    """Quotient of the balanced two-cap test function on ``poly``.

    The field is ``u(|x - x0|)`` on the cap at ``x0`` and ``-c u(|x - x1|)`` on
    the cap at ``x1``, with ``u`` the radial Dirichlet eigenfunction of the ball
    of radius ``diam/2`` and ``c`` chosen so that ``int |phi|^(p-2) phi = 0``.
    With that balance the optimal shift is zero, so the value is
    ``int |grad phi|^p / int |phi|^p``.
    """
    Exponents(p, p, 2)
    cap0, cap1 = geometry.caps(poly, arc_segments)
    prof = oned.radial_dirichlet(p, 2, poly.diameter / 2.0)
    parts = []
    for cap in (cap0, cap1):
        pts, w = _fan_points(cap.polygon, quad_levels)
        r = np.linalg.norm(pts - cap.center, axis=1)
        h = np.maximum(prof(r), 0.0)
        dh = np.abs(prof.derivative(r))
        parts.append((w @ h ** (p - 1), w @ h ** p, w @ dh ** p))
    (m0, b0, a0), (m1, b1, a1) = parts
    c = (m0 / m1) ** (1.0 / (p - 1.0))
    value = (a0 + c ** p * a1) / (b0 + c ** p * b1)
    if not return_details:
        return float(value)
    balance = abs(m0 - c ** (p - 1) * m1) / (m0 + c ** (p - 1) * m1)
    return float(value), {"c": float(c), "balance_residual": float(balance),
                          "cap_areas": [cap0.polygon.area, cap1.polygon.area],
                          "ball_eigenvalue": prof.eigenvalue}
