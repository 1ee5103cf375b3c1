"""One-dimensional and radial problems.

* ``pi_p``: the constant governing 1D p-Laplacian eigenvalues.
* ``radial_dirichlet`` / ``radial_dirichlet_pq``: first Dirichlet eigenvalue
  of the p-Laplacian on an N-ball, by shooting on the radial ODE.
* ``weighted_neumann_1d``: the Neumann problem on ``[-d/2, d/2]`` with the
  double-cone section weight, by direct discrete minimisation.
* ``t_center``: the inner scalar problem ``min_t sum w |v - t|^q``.

The radial ODE is written for the flux ``w = r^(N-1) |h'|^(p-2) h'`` so the
origin is harmless, and integrated with fixed-step RK4 in the stretched
variable ``sigma = sqrt(r / R)``, which smooths the ``r^(p/(p-1))`` behaviour
of ``h`` at the centre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit
from scipy import integrate, optimize

__all__ = [
    "Exponents",
    "RadialProfile",
    "WeightedEigenpair",
    "ShootingError",
    "StagnationError",
    "pi_p",
    "pi_p_quadrature",
    "radial_dirichlet",
    "radial_dirichlet_pq",
    "weighted_neumann_1d",
    "t_center",
    "ball_volume",
    "sphere_area",
]


class ShootingError(RuntimeError):
    """Shooting failed to bracket or to converge; ``bracket`` holds the last interval."""

    def __init__(self, msg, bracket=None):
        super().__init__(msg)
        self.bracket = bracket


class StagnationError(RuntimeError):
    """Descent stopped short of the gradient tolerance; ``iterate`` is the best point."""

    def __init__(self, msg, iterate=None, value=None):
        super().__init__(msg)
        self.iterate = iterate
        self.value = value


@dataclass(frozen=True)
class Exponents:
    p: float
    q: float
    N: int = 2

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.q > 1:
            raise ValueError(f"q must exceed 1, got {self.q}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not self.q < self.p_star:
            raise ValueError(f"q={self.q} must be below the Sobolev exponent {self.p_star}")

    @property
    def p_star(self) -> float:
        if self.p < self.N:
            return self.N * self.p / (self.N - self.p)
        return math.inf

    @property
    def scaling_exponent(self) -> float:
        """``e`` such that the eigenvalues scale like ``length^(-e)``."""
        return self.p + self.N * self.p / self.q - self.N


def ball_volume(N: int) -> float:
    """Lebesgue measure of the unit ball in R^N (``1`` for N = 0)."""
    return math.pi ** (N / 2) / math.gamma(N / 2 + 1)


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N (``2`` for N = 1)."""
    return 2 * math.pi ** (N / 2) / math.gamma(N / 2)


# -- pi_p --------------------------------------------------------------------

def pi_p(p: float) -> float:
    """``2 (p-1)^(1/p) (pi/p) / sin(pi/p)``."""
    if not p > 1:
        raise ValueError(f"pi_p needs p > 1, got {p}")
    return 2.0 * (p - 1.0) ** (1.0 / p) * (math.pi / p) / math.sin(math.pi / p)


def pi_p_quadrature(p: float) -> float:
    """``2 int_0^{(p-1)^(1/p)} (1 - t^p/(p-1))^(-1/p) dt`` by adaptive quadrature.

    After ``t = (p-1)^(1/p) s`` the endpoint singularity ``(1-s)^(-1/p)`` is
    handed to QUADPACK's algebraic weight; the remaining factor is smooth.
    """
    if not p > 1:
        raise ValueError(f"pi_p needs p > 1, got {p}")

    def smooth(s):
        u = 1.0 - s
        if u <= 0.0:
            return p ** (-1.0 / p)
        return (-math.expm1(p * math.log1p(-u)) / u) ** (-1.0 / p)

    val, _ = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(0.0, -1.0 / p),
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * (p - 1.0) ** (1.0 / p) * val


# -- radial shooting ---------------------------------------------------------

@njit(cache=True)
def _rhs(s, h, w, eta, p, q, N, R):
    r = R * s * s
    drds = 2.0 * R * s
    rn = r ** (N - 1) if N > 1 else 1.0
    if w == 0.0:
        hp = 0.0
    else:
        hp = (abs(w) / rn) ** (1.0 / (p - 1.0))
        if w < 0.0:
            hp = -hp
    if h == 0.0:
        src = 0.0
    else:
        src = abs(h) ** (q - 1.0)
        if h < 0.0:
            src = -src
    return hp * drds, -eta * rn * src * drds


@njit(cache=True)
def _shoot(eta, amp, p, q, N, R, n, store):
    """RK4 from ``r = 1e-8 R`` to ``R``; returns (crossed, h, w) arrays.

    ``crossed`` is True when ``h`` reaches zero somewhere in ``(0, R]``; the
    integration stops there unless ``store`` asks for the whole trajectory.
    """
    s0 = 1e-4
    ds = (1.0 - s0) / n
    hs = np.zeros(n + 1)
    ws = np.zeros(n + 1)
    r0 = R * s0 * s0
    h = amp
    w = -eta * amp ** (q - 1.0) * r0 ** N / N
    hs[0] = h
    ws[0] = w
    s = s0
    crossed = False
    for i in range(n):
        k1h, k1w = _rhs(s, h, w, eta, p, q, N, R)
        k2h, k2w = _rhs(s + 0.5 * ds, h + 0.5 * ds * k1h, w + 0.5 * ds * k1w, eta, p, q, N, R)
        k3h, k3w = _rhs(s + 0.5 * ds, h + 0.5 * ds * k2h, w + 0.5 * ds * k2w, eta, p, q, N, R)
        k4h, k4w = _rhs(s + ds, h + ds * k3h, w + ds * k3w, eta, p, q, N, R)
        h = h + ds / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h)
        w = w + ds / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        s = s0 + (i + 1) * ds
        hs[i + 1] = h
        ws[i + 1] = w
        if h <= 0.0:
            crossed = True
            if not store:
                return True, hs, ws
    return crossed, hs, ws


def _crossed(eta, amp, p, q, N, R, n) -> bool:
    return bool(_shoot(eta, amp, p, q, N, R, n, False)[0])


def _bisect(pred, lo, hi, iters, log=False):
    """Shrink ``[lo, hi]`` with ``pred(lo) = False``, ``pred(hi) = True``."""
    for _ in range(iters):
        mid = math.sqrt(lo * hi) if log else 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def _bracket(pred, lo, hi, grow=10.0, tries=40):
    for _ in range(tries):
        if not pred(lo):
            break
        lo /= grow
    else:
        raise ShootingError("could not find a non-crossing lower end", (lo, hi))
    for _ in range(tries):
        if pred(hi):
            break
        hi *= grow
    else:
        raise ShootingError("could not find a crossing upper end", (lo, hi))
    return lo, hi


@dataclass(frozen=True)
class RadialProfile:
    """Radial eigenfunction ``h`` on ``[0, R]`` sampled at ``r``; ``dh`` is ``h'``."""

    eigenvalue: float
    radius: float
    r: np.ndarray
    h: np.ndarray
    dh: np.ndarray
    p: float
    q: float
    N: int
    meta: dict = field(default_factory=dict)

    def __call__(self, rad):
        return np.interp(rad, self.r, self.h, right=0.0)

    def derivative(self, rad):
        return np.interp(rad, self.r, self.dh, right=0.0)

    def to_csv(self) -> str:
        return "r,h\n" + "".join(f"{a:.12g},{b:.12g}\n" for a, b in zip(self.r, self.h))

    def integral(self, f) -> float:
        """``int_0^R f(r) r^(N-1) dr`` times the unit sphere area, by Simpson."""
        return sphere_area(self.N) * float(
            integrate.simpson(f * self.r ** (self.N - 1), x=self.r))


def _profile(eta, amp, p, q, N, R, n, eigenvalue, meta) -> RadialProfile:
    _, hs, ws = _shoot(eta, amp, p, q, N, R, n, True)
    s = 1e-4 + (1.0 - 1e-4) * np.arange(n + 1) / n
    r = R * s * s
    rn = r ** (N - 1) if N > 1 else np.ones_like(r)
    dh = np.sign(ws) * (np.abs(ws) / rn) ** (1.0 / (p - 1.0))
    r = np.concatenate([[0.0], r])
    h = np.concatenate([[amp], hs])
    dh = np.concatenate([[0.0], dh])
    h[-1] = max(h[-1], 0.0)
    return RadialProfile(eigenvalue, R, r, h, dh, p, q, int(N), meta)


@lru_cache(maxsize=256)
def _shoot_eta(p, q, N, R, n, iters):
    """Bracket of the source coefficient for which ``h(0) = 1`` first vanishes at ``R``."""
    pred = lambda eta: _crossed(eta, 1.0, p, q, N, R, n)
    lo, hi = _bracket(pred, 1e-3 / R ** p, 1e3 / R ** p)
    lo, hi = _bisect(pred, lo, hi, iters)
    if (hi - lo) > 1e-12 * hi:
        raise ShootingError("bisection did not converge", (lo, hi))
    return lo, hi


def radial_dirichlet(p: float, N: int, R: float = 1.0, steps: int = 10_000,
                     rtol: float = 1e-8, max_doublings: int = 4) -> RadialProfile:
    """First Dirichlet eigenvalue of ``-Delta_p`` on the ball of radius ``R`` in R^N.

    Bisection on the eigenvalue for ``h(R) = 0`` with ``h(0) = 1``; the step
    count is doubled until two successive eigenvalues agree to ``rtol``.
    """
    Exponents(p, p, N)
    if R <= 0:
        raise ValueError("radius must be positive")
    n = steps
    lo, hi = _shoot_eta(float(p), float(p), int(N), float(R), n, 60)
    eta = 0.5 * (lo + hi)
    for _ in range(max_doublings):
        lo, hi = _shoot_eta(float(p), float(p), int(N), float(R), 2 * n, 60)
        eta2 = 0.5 * (lo + hi)
        change = abs(eta2 - eta) / eta2
        n, eta = 2 * n, eta2
        if change <= rtol:
            break
    meta = {"steps": n, "step_change": change, "bracket": (lo, hi)}
    return _profile(lo, 1.0, p, p, N, R, n, eta, meta)


def _pq_value(p, q, N, R, n):
    # the non-crossing end keeps h >= 0 on [0, R]
    lo, hi = _shoot_eta(p, q, N, R, n, 60)
    prof = _profile(lo, 1.0, p, q, N, R, n, 0.0, {})
    num = prof.integral(np.abs(prof.dh) ** p)
    den = prof.integral(np.abs(prof.h) ** q)
    return num / den ** (p / q), prof, lo


def radial_dirichlet_pq(p: float, q: float, N: int, R: float = 1.0, steps: int = 10_000,
                        rtol: float = 1e-8, max_doublings: int = 4) -> RadialProfile:
    """``lambda_{p,q}`` of the ball of radius ``R``.

    Finds the positive radial solution of
    ``-(r^(N-1)|h'|^(p-2)h')' = c r^(N-1)|h|^(q-2)h`` with ``h(0) = 1``,
    ``h(R) = 0`` by bisection on ``c``, then evaluates the Rayleigh quotient
    ``int |h'|^p / (int |h|^q)^(p/q)``. The quotient does not see the
    amplitude, so this is the same function as the ``c = 1`` solution with a
    shot amplitude, without the overflow that amplitude suffers as q -> p.
    ``q == p`` defers to :func:`radial_dirichlet`.
    """
    Exponents(p, q, N)
    if R <= 0:
        raise ValueError("radius must be positive")
    if q == p:
        return radial_dirichlet(p, N, R, steps, rtol, max_doublings)
    n = steps
    val, prof, c = _pq_value(float(p), float(q), int(N), float(R), n)
    for _ in range(max_doublings):
        val2, prof2, c = _pq_value(float(p), float(q), int(N), float(R), 2 * n)
        change = abs(val2 - val) / val2
        n, val, prof = 2 * n, val2, prof2
        if change <= rtol:
            break
    grad_int = prof.integral(np.abs(prof.dh) ** p)
    src_int = c * prof.integral(np.abs(prof.h) ** q)
    meta = {"steps": n, "step_change": change, "source_coefficient": c,
            "energy_identity_gap": abs(grad_int - src_int) / src_int}
    return RadialProfile(val, prof.radius, prof.r, prof.h, prof.dh, p, q, int(N), meta)


# -- inner t-centering -------------------------------------------------------

def _signed_pow(x, e):
    return np.sign(x) * np.abs(x) ** e


def t_center(values, weights, q: float, t0: float | None = None, rtol: float = 1e-10) -> float:
    """Minimiser of ``t -> sum_i w_i |v_i - t|^q`` for ``q > 1``.

    The derivative is increasing in ``t``, so the root is kept bracketed in
    ``[min v, max v]``; Newton steps are taken when they stay inside the
    bracket, bisection otherwise.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if not q > 1:
        raise ValueError("q must exceed 1")
    if q == 2.0:
        return float(w @ v / w.sum())
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        return lo
    t = 0.5 * (lo + hi) if t0 is None or not lo < t0 < hi else float(t0)
    for _ in range(200):
        d = v - t
        a = np.abs(d)
        g = w @ _signed_pow(d, q - 1.0)          # = -F'(t)/q
        scale = w @ a ** (q - 1.0)
        if abs(g) <= rtol * scale:
            return t
        if g > 0:
            lo = t
        else:
            hi = t
        with np.errstate(divide="ignore"):
            curv = (q - 1.0) * (w @ a ** (q - 2.0)) if q >= 2 else (q - 1.0) * float(
                w[a > 0] @ a[a > 0] ** (q - 2.0))
        step = t + g / curv if np.isfinite(curv) and curv > 0 else None
        if step is not None and lo < step < hi:
            t = step
        else:
            t = 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * max(abs(lo), abs(hi), 1e-300):
            return t
    return t


# -- Neumann problem with the double-cone weight -----------------------------

@dataclass(frozen=True)
class WeightedEigenpair:
    """Discrete minimiser ``f`` on ``s`` and its quotient ``eta``."""

    eta: float
    d: float
    s: np.ndarray
    f: np.ndarray
    N: int
    p: float
    constraint_residual: float
    meta: dict = field(default_factory=dict)

    def at(self, x) -> float:
        return float(np.interp(x, self.s, self.f))

    def to_csv(self) -> str:
        return "s,f\n" + "".join(f"{a:.12g},{b:.12g}\n" for a, b in zip(self.s, self.f))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)


class _WeightedProblem:
    """Discrete quotient on a uniform grid, gradients included."""

    def __init__(self, p, N, d, n):
        self.p, self.N, self.d, self.n = p, N, d, n
        self.s = np.linspace(-d / 2, d / 2, n)
        self.ds = d / (n - 1)
        omega = ball_volume(N - 1)
        a, b = self.s[:-1], self.s[1:]
        cells = np.arange(n - 1)
        straddle = (a < 0) & (b > 0)
        lo = np.concatenate([a[~straddle], a[straddle], np.zeros(straddle.sum())])
        hi = np.concatenate([b[~straddle], np.zeros(straddle.sum()), b[straddle]])
        cell = np.concatenate([cells[~straddle], cells[straddle], cells[straddle]])
        x = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * _GL_X[None, :]
        wq = 0.5 * (hi - lo)[:, None] * _GL_W[None, :] * omega * (d / 2 - np.abs(x)) ** (N - 1)
        self.i0 = np.repeat(cell, len(_GL_X))
        self.theta = ((x.ravel() - self.s[self.i0]) / self.ds)
        self.wq = wq.ravel()
        self.gcell = np.bincount(self.i0, weights=self.wq, minlength=n - 1)
        self._t = 0.0

    def interp(self, v):
        return v[self.i0] * (1 - self.theta) + v[self.i0 + 1] * self.theta

    def scatter(self, c):
        n = self.n
        return (np.bincount(self.i0, weights=c * (1 - self.theta), minlength=n)
                + np.bincount(self.i0 + 1, weights=c * self.theta, minlength=n))

    def parts(self, v):
        p = self.p
        slope = np.diff(v) / self.ds
        A = self.gcell @ np.abs(slope) ** p
        V = self.interp(v)
        t = t_center(V, self.wq, p, t0=self._t)
        self._t = t
        D = self.wq @ np.abs(V - t) ** p
        return A, D, slope, V, t

    def quotient(self, v):
        A, D, *_ = self.parts(v)
        return A / D

    def fun(self, v):
        p = self.p
        A, D, slope, V, t = self.parts(v)
        ca = self.gcell * p * _signed_pow(slope, p - 1) / self.ds
        gA = np.zeros_like(v)
        gA[1:] += ca
        gA[:-1] -= ca
        gD = self.scatter(p * self.wq * _signed_pow(V - t, p - 1))
        return math.log(A) - math.log(D), gA / A - gD / D


def _descend(prob, v0, gtol=1e-10, maxiter=20000):
    v0 = v0 / np.max(np.abs(v0))
    res = optimize.minimize(prob.fun, v0, jac=True, method="L-BFGS-B",
                            options={"maxiter": maxiter, "maxcor": 30, "gtol": gtol,
                                     "ftol": 1e-15, "maxfun": 4 * maxiter})
    return res


def weighted_neumann_1d(p: float, N: int, d: float, n: int = 2048, seed: int = 0,
                        restarts: int = 3, gtol: float = 1e-9) -> WeightedEigenpair:
    """Minimise ``int |v'|^p g / min_t int |v - t|^p g`` over P1 functions on ``n`` nodes.

    ``g(s) = omega_{N-1} (d/2 - |s|)^(N-1)`` is the section measure of the
    double cone of height ``d/2`` on each side. Integrals of ``|v - t|^p g``
    use 4-point Gauss rules on each cell (cells split at ``s = 0`` where
    ``g`` has a kink). Seeds (``f = s`` plus ``restarts`` random ones) are
    first solved on a coarse grid and then prolonged level by level.
    """
    Exponents(p, p, max(N, 1))
    if n < 64:
        raise ValueError("need at least 64 grid points")
    levels = [n]
    while levels[-1] // 4 >= 64:
        levels.append(levels[-1] // 4)
    levels = levels[::-1]
    rng = np.random.default_rng(seed)
    coarse = _WeightedProblem(p, N, d, levels[0])
    seeds = [coarse.s.copy()] + [rng.uniform(-1, 1, levels[0]) for _ in range(restarts)]
    best, best_val, quotients = None, math.inf, []
    for v in seeds:
        res = _descend(coarse, v, gtol=gtol)
        val = coarse.quotient(res.x)
        quotients.append(val)
        if val < best_val:
            best, best_val = res.x, val
    v, prob, res = best, coarse, None
    for m in levels[1:]:
        nxt = _WeightedProblem(p, N, d, m)
        v = np.interp(nxt.s, prob.s, v)
        prob = nxt
        res = _descend(prob, v, gtol=gtol)
        v = res.x
    if res is None:
        res = _descend(prob, v, gtol=gtol)
        v = res.x
    gnorm = float(np.max(np.abs(res.jac))) * float(np.max(np.abs(v)))
    if not np.all(np.isfinite(v)) or gnorm > 1e-5:
        raise StagnationError(f"descent stagnated (scaled gradient {gnorm:.2e})", v,
                              prob.quotient(v))
    A, D, _, V, t = prob.parts(v)
    f = v - t
    f = f / np.max(np.abs(f))
    if f[-1] < 0:
        f = -f
    Vf = prob.interp(f)
    resid = abs(prob.wq @ _signed_pow(Vf, p - 1)) / (prob.wq @ np.abs(Vf) ** (p - 1))
    meta = {"levels": levels, "restart_quotients": quotients, "iterations": int(res.nit),
            "scaled_gradient": gnorm}
    return WeightedEigenpair(float(A / D), d, prob.s.copy(), f, int(N), p, float(resid), meta)
