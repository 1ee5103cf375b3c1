"""
From a weighted interval problem to the ball
============================================

Collapsing a thin double cone onto its axis gives a one-dimensional Neumann
problem with weight (d/2 - |s|)^(N-1). Its first eigenvalue matches the
Dirichlet eigenvalue of the ball of radius d/2, and its minimiser is odd with
a single zero at s = 0.
"""

import numpy as np

from neumann_sharp.oned import radial_dirichlet, weighted_neumann_1d

for p, N in ((2.0, 2), (1.5, 2), (3.0, 2), (2.0, 3)):
    res = weighted_neumann_1d(p, N, d=2.0, n=2048)
    ball = radial_dirichlet(p, N, 1.0).eigenvalue
    print(f"p={p} N={N}: weighted={res.eta:.8f} ball={ball:.8f} "
          f"rel.diff={abs(res.eta - ball) / ball:.1e} f(0)={res.at(0.0):.1e}")

# on nested grids the discrete value decreases toward the limit
for n in (129, 257, 513, 1025):
    print(n, weighted_neumann_1d(2.0, 2, 2.0, n=n).eta)

# the minimiser is odd: compare f(s) and -f(-s)
res = weighted_neumann_1d(2.0, 2, 2.0, n=513)
print("max |f(s) + f(-s)| =", np.max(np.abs(res.f + res.f[::-1])))
