"""
Nodal domains of Neumann eigenfunctions
=======================================

For q >= p every sign component of a first nontrivial Neumann eigenfunction
reaches the boundary. The component finder also flags a field whose positive
part is an interior bump.
"""

import numpy as np

from neumann_sharp.fem2d import nodal_domains, rayleigh_mu
from neumann_sharp.geometry import make_regular_polygon, random_convex_polygon
from neumann_sharp.mesh import triangulate

rng = np.random.default_rng(5)
polys = [make_regular_polygon(5, 1.0)] + [random_convex_polygon(rng, 12) for _ in range(3)]
for poly in polys:
    mesh = triangulate(poly, poly.diameter / 20)
    for p, q in ((2.0, 2.0), (1.5, 2.0), (2.0, 3.0)):
        comps = nodal_domains(mesh, rayleigh_mu(mesh, p, q).field)
        print(poly.describe(), (p, q), [(c.sign, c.size, c.touches_boundary) for c in comps])

# an interior bump: one positive component that misses the boundary
mesh = triangulate(make_regular_polygon(6, 1.0), 0.05)
r = np.linalg.norm(mesh.vertices, axis=1)
print(nodal_domains(mesh, np.where(r < 0.3, 0.3 - r, 0.0)))
