"""End-to-end acceptance criteria, one test per criterion.

Each test prints ``CRITERION n: PASS|FAIL ...`` (shown with ``-s``) and the
same lines are repeated in the pytest terminal summary.
"""

import contextlib
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import j01, jp11
from neumann_sharp import bounds
from neumann_sharp.fem2d import nodal_domains, rayleigh_lambda, rayleigh_mu
from neumann_sharp.geometry import (make_hexagon, make_rectangle, make_regular_polygon,
                                    make_rhombus, random_convex_polygon)
from neumann_sharp.mesh import refine, triangulate
from neumann_sharp.oned import (pi_p, pi_p_quadrature, radial_dirichlet, weighted_neumann_1d)

P_VALUES = (1.5, 2.0, 3.0)


def domain_suite():
    rng = np.random.default_rng(2024)
    suite = {
        "square": make_rectangle(1, 1),
        "square_2.5": make_rectangle(2.5, 2.5),
        "rect_1x0.5": make_rectangle(1, 0.5),
        "rect_1x0.2": make_rectangle(1, 0.2),
        "rect_2x1.5": make_rectangle(2, 1.5),
    }
    for k in (1, 2, 4, 8):
        suite[f"rhombus_k{k}"] = make_rhombus(2, k)
    for n in range(3, 13):
        suite[f"ngon_{n}"] = make_regular_polygon(n, 1.0)
    for i in range(5):
        suite[f"random_{i}"] = random_convex_polygon(rng, n_points=10 + 2 * i)
    return suite


SUITE = domain_suite()
FIVE = ["square", "rect_1x0.5", "rhombus_k4", "ngon_5", "random_0"]


@contextlib.contextmanager
def criterion(number: int, title: str, limit_s: float):
    start = time.perf_counter()
    details: list = []
    try:
        yield details
        elapsed = time.perf_counter() - start
        assert elapsed < limit_s, f"runtime {elapsed:.1f}s over the {limit_s:.0f}s budget"
    except AssertionError as exc:
        elapsed = time.perf_counter() - start
        line = f"CRITERION {number}: FAIL {title} ({elapsed:.1f}s) {exc}".splitlines()[0]
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"CRITERION {number}: PASS {title} ({elapsed:.1f}s) {'; '.join(details)}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_01_pi_p():
    with criterion(1, "pi_p closed form, conjugate identity, quadrature", 1.0) as info:
        assert abs(pi_p(2) - math.pi) <= 1e-12 * math.pi
        worst = 0.0
        for p in (1.2, 1.5, 3.0, 5.0):
            rel = abs(pi_p(p) - pi_p(p / (p - 1))) / pi_p(p)
            assert rel <= 1e-12, f"conjugate identity off by {rel:.2e} at p={p}"
            quad = abs(pi_p_quadrature(p) - pi_p(p)) / pi_p(p)
            assert quad <= 1e-10, f"quadrature off by {quad:.2e} at p={p}"
            worst = max(worst, rel, quad)
        info.append(f"worst relative deviation {worst:.1e}")


def test_criterion_02_radial_oracle():
    with criterion(2, "radial Dirichlet vs Bessel series oracle and scaling", 5.0) as info:
        ref = j01() ** 2
        val = radial_dirichlet(2, 2, 1.0).eigenvalue
        rel = abs(val - ref) / ref
        assert rel <= 1e-6, f"j01^2 mismatch {rel:.2e}"
        worst = 0.0
        for p, R in ((2.0, 0.5), (2.0, 3.0), (1.5, 2.0), (3.0, 0.7)):
            a = radial_dirichlet(p, 2, 1.0).eigenvalue
            b = radial_dirichlet(p, 2, R).eigenvalue
            dev = abs(b * R ** p / a - 1)
            assert dev <= 1e-8, f"scaling off by {dev:.2e} at p={p}, R={R}"
            worst = max(worst, dev)
        info.append(f"rel error {rel:.1e}, scaling deviation {worst:.1e}")


def test_criterion_03_weighted_equivalence():
    with criterion(3, "weighted 1D problem equals ball eigenvalue", 120.0) as info:
        for p, N in ((1.5, 2), (2.0, 2), (3.0, 2), (2.0, 3)):
            res = weighted_neumann_1d(p, N, 2.0, n=2048)
            ball = radial_dirichlet(p, N, 1.0).eigenvalue
            rel = abs(res.eta - ball) / ball
            f0 = abs(res.at(0.0)) / np.max(np.abs(res.f))
            assert rel <= 1e-2, f"(p,N)=({p},{N}) differs by {rel:.2e}"
            assert f0 < 1e-3, f"(p,N)=({p},{N}) has |f(0)|/max|f| = {f0:.1e}"
            info.append(f"({p},{N}) rel {rel:.1e}")


def test_criterion_04_fem_oracles():
    with criterion(4, "FEM p=2 against square and disc closed forms", 300.0) as info:
        coarse = triangulate(make_rectangle(1, 1), 0.05)
        fine = refine(coarse)
        for fn, ref, name in ((rayleigh_mu, math.pi ** 2, "mu"), (rayleigh_lambda, 2 * math.pi ** 2, "lambda")):
            a, b = fn(coarse, 2, 2).value, fn(fine, 2, 2).value
            extrap = (4 * b - a) / 3
            rel = abs(extrap - ref) / ref
            assert rel <= 1e-2, f"square {name} extrapolated off by {rel:.2e}"
            info.append(f"square {name} {rel:.1e}")
        disc = triangulate(make_regular_polygon(64, 1.0), 0.05)
        mu = rayleigh_mu(disc, 2, 2).value
        rel = abs(mu - jp11() ** 2) / jp11() ** 2
        assert rel <= 1.5e-2, f"64-gon mu off by {rel:.2e}"
        info.append(f"64-gon mu {rel:.1e}")


def test_criterion_05_main_inequality():
    with criterion(5, "main inequality on the domain suite", 1800.0) as info:
        assert len(SUITE) >= 20
        failures, smallest = [], math.inf
        for name, poly in SUITE.items():
            for p in P_VALUES:
                r = bounds.check_main(poly, p)
                smallest = min(smallest, r.margin / r.rhs)
                if not (r.passed and r.margin > 0):
                    failures.append(f"{name} p={p} margin {r.margin:.3g}")
        assert not failures, "; ".join(failures)
        info.append(f"{len(SUITE)} domains x {len(P_VALUES)} p, min relative margin {smallest:.3f}")


def test_criterion_06_sharpness():
    with criterion(6, "rhombus sequence approaches the ball value from below", 1800.0) as info:
        for p in P_VALUES:
            table = bounds.sharpness_sweep(p, 2.0, [1, 2, 4, 8])
            vals, limit = table.values, table.rows[0][2]
            assert all(b > a for a, b in zip(vals, vals[1:])), f"p={p} not increasing: {vals}"
            assert all(v < limit for v in vals), f"p={p} reaches the limit {limit}: {vals}"
            gap = (limit - vals[-1]) / limit
            assert gap < 0.1, f"p={p} k=8 gap {gap:.3f}"
            info.append(f"p={p} k=8 gap {gap:.4f}")


def test_criterion_07_lower_bounds():
    with criterion(7, "lower bounds with 3x discretization margin", 1200.0) as info:
        failures, worst = [], math.inf
        for name, poly in SUITE.items():
            for p in P_VALUES:
                r = bounds.check_pw(poly, p)
                worst = min(worst, r.margin / max(r.tol, 1e-300))
                if not r.passed:
                    failures.append(f"pw {name} p={p}: margin {r.margin:.3g} tol {r.tol:.3g}")
        for name in FIVE:
            for p, q in ((3.0, 2.0), (2.0, 1.5)):
                r = bounds.check_pq_lower(SUITE[name], p, q)
                if not r.passed:
                    failures.append(f"pq_lower {name} ({p},{q}): margin {r.margin:.3g} tol {r.tol:.3g}")
        assert not failures, "; ".join(failures)
        info.append(f"smallest margin/tolerance ratio for pw {worst:.1f}")


def test_criterion_08_pq_regime():
    with criterion(8, "p != q upper bounds, collapse trends, comparison lemma", 1200.0) as info:
        failures = []
        for name in FIVE:
            for p, q in ((2.0, 3.0), (2.0, 2.5), (1.5, 2.0)):
                r = bounds.check_pq_upper(SUITE[name], p, q)
                if not r.passed:
                    failures.append(f"pq_upper {name} ({p},{q}) margin {r.margin:.3g}")
        dec = bounds.collapse_sweep(2.0, 3.0, [0.2, 0.1, 0.05])
        inc = bounds.collapse_sweep(3.0, 2.0, [0.2, 0.1, 0.05])
        if not dec.flags["decreasing"]:
            failures.append(f"collapse (2,3) not decreasing: {dec.values}")
        if not inc.flags["increasing"]:
            failures.append(f"collapse (3,2) not increasing: {inc.values}")
        combos = [
            (make_rectangle(1, 1), 2.0, 2.0, 3.0),
            (make_rectangle(2, 1), 2.0, 2.0, 2.5),
            (make_rhombus(2, 2), 1.5, 1.5, 2.0),
            (make_hexagon(1.0, 0.8, 0.4), 3.0, 2.0, 3.0),
            (make_regular_polygon(3, 1.0), 2.0, 1.5, 2.5),
        ]
        for poly, p, s, q in combos:
            for r in bounds.check_comparison(triangulate(poly, poly.diameter / 20), p, s, q):
                if not r.passed:
                    failures.append(f"{r.id} ({p},{s},{q}) margin {r.margin:.3g}")
        assert not failures, "; ".join(failures)
        info.append("collapse (2,3): " + ", ".join(f"{v:.4g}" for v in dec.values))
        info.append("collapse (3,2): " + ", ".join(f"{v:.4g}" for v in inc.values))


def test_criterion_09_nodal_property():
    with criterion(9, "mu < lambda and boundary-touching nodal domains", 600.0) as info:
        names = ["square", "rect_1x0.5", "rect_1x0.2", "rhombus_k2", "rhombus_k8",
                 "ngon_3", "ngon_6", "ngon_11", "random_1", "random_3"]
        pairs = [(2.0, 2.0), (1.5, 2.0), (2.0, 3.0), (3.0, 3.0), (1.5, 1.5)]
        failures = []
        for i, name in enumerate(names):
            p, q = pairs[i % len(pairs)]
            r = bounds.check_debole(SUITE[name], p, q)
            if not (r.passed and r.context["all_touch_boundary"]):
                failures.append(f"{name} ({p},{q}) pass={r.passed} "
                                f"touch={r.context['all_touch_boundary']}")
        mesh = triangulate(make_rectangle(1, 1), 0.05)
        rad = np.linalg.norm(mesh.vertices, axis=1)
        comps = nodal_domains(mesh, np.where(rad < 0.25, 0.25 - rad, 0.0))
        if not (len(comps) == 1 and not comps[0].touches_boundary):
            failures.append("interior bump not flagged")
        assert not failures, "; ".join(failures)
        info.append(f"{len(names)} domains, interior bump flagged")


def test_criterion_10_cli_determinism(tmp_path):
    with criterion(10, "repeated CLI runs are byte-identical", 300.0) as info:
        commands = [
            ["compute", "mu", "--shape", "rhombus", "--k", "2", "--p", "1.5", "--q", "2",
             "--h", "0.08", "--seed", "11"],
            ["verify", "main", "--shape", "hex", "--p", "3", "--seed", "11"],
            ["sweep", "collapse", "--p", "2", "--q", "3", "--widths", "0.2,0.1", "--seed", "11"],
        ]
        for j, args in enumerate(commands):
            blobs = []
            for i in range(2):
                out = tmp_path / f"{j}_{i}.out"
                res = subprocess.run([sys.executable, "-m", "neumann_sharp.cli", *args,
                                      "--out", str(out)], capture_output=True)
                assert res.returncode == 0, res.stderr.decode()[-300:]
                blobs.append((res.stdout, out.read_bytes()))
            assert blobs[0] == blobs[1], f"outputs differ for {' '.join(args[:2])}"
        info.append(f"{len(commands)} commands run twice")
