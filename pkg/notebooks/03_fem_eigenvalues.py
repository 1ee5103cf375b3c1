"""
Neumann and Dirichlet eigenvalues on polygons
=============================================

P1 finite elements with a smoothed gradient norm and multi-start descent on
the logarithm of the Rayleigh quotient. For p = 2 the square and the disc
have closed forms to compare against.
"""

import math

from neumann_sharp.fem2d import rayleigh_lambda, rayleigh_mu
from neumann_sharp.geometry import make_rectangle, make_regular_polygon
from neumann_sharp.mesh import refine, triangulate

square = triangulate(make_rectangle(1, 1), 0.05)
fine = refine(square)

mu = [rayleigh_mu(m, 2, 2).value for m in (square, fine)]
lam = [rayleigh_lambda(m, 2, 2).value for m in (square, fine)]
# second-order convergence lets two nested meshes extrapolate
print("square mu:", mu, "extrapolated", (4 * mu[1] - mu[0]) / 3, "exact", math.pi ** 2)
print("square lambda:", lam, "extrapolated", (4 * lam[1] - lam[0]) / 3, "exact", 2 * math.pi ** 2)

disc = triangulate(make_regular_polygon(64, 1.0), 0.05)
e = rayleigh_mu(disc, 2, 2)
print("64-gon mu:", e.value, "(disc: 3.3900)")
print("restart values:", e.meta["restart_values"])
print("constraint residual:", e.constraint_residual)

# nonlinear cases need no closed form to run
for p, q in ((1.5, 1.5), (3.0, 3.0), (2.0, 3.0), (3.0, 2.0)):
    print(f"p={p} q={q}: mu={rayleigh_mu(square, p, q).value:.6f} "
          f"lambda={rayleigh_lambda(square, p, q).value:.6f}")
