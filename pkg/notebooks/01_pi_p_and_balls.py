"""
The constant pi_p and radial eigenvalues of balls
=================================================

pi_p governs the one-dimensional p-Laplacian: the first nontrivial Neumann
eigenvalue of an interval of length d is (pi_p / d)^p. On balls, the first
Dirichlet eigenvalue comes from shooting the radial ODE.
"""

import math

from neumann_sharp.oned import pi_p, pi_p_quadrature, radial_dirichlet, radial_dirichlet_pq

# closed form against an independent quadrature of the defining integral
for p in (1.2, 1.5, 2.0, 3.0, 5.0):
    print(f"p={p:<4} pi_p={pi_p(p):.12f}  quadrature={pi_p_quadrature(p):.12f}")

# pi_p is symmetric under p -> p/(p-1)
print("pi_1.5 - pi_3 =", pi_p(1.5) - pi_p(3.0))

# for p = 2 the disc value is the square of the first zero of J_0
prof = radial_dirichlet(2.0, 2, 1.0)
print("lambda_2(unit disc) =", prof.eigenvalue, "steps used:", prof.meta["steps"])

# eigenvalues scale like R^(-p); the profile is available as samples
half = radial_dirichlet(2.0, 2, 0.5)
print("ratio for R=1/2:", half.eigenvalue / prof.eigenvalue, "(expected 4)")
print("h(0), h(0.5), h(1):", prof(0.0), prof(0.5), prof(1.0))

# with q != p the value depends on the ball size through p + Np/q - N
for q in (1.5, 2.5, 3.0):
    a = radial_dirichlet_pq(2.0, q, 2, 1.0).eigenvalue
    b = radial_dirichlet_pq(2.0, q, 2, 2.0).eigenvalue
    print(f"q={q}: lambda={a:.6f}, observed exponent {math.log(a / b, 2):.6f}, "
          f"predicted {2 + 4 / q - 2:.6f}")
