"""First nontrivial Neumann and first Dirichlet eigenvalues of the p-Laplacian.

Modules:

``geometry``  convex polygons, diameters, caps and shape builders
``oned``      pi_p, radial shooting on balls, the weighted 1D Neumann problem
``mesh``      triangulation and uniform refinement of convex polygons
``fem2d``     P1 Rayleigh-quotient minimisation, nodal domains, two-cap test
``bounds``    inequality checks and sweeps returning reports
``cli``       the ``neumann-sharp`` command
"""

from .fem2d import Eigenpair, SolverOptions, nodal_domains, rayleigh_lambda, rayleigh_mu, two_cap_quotient
from .geometry import ConvexPolygon, caps, diameter, make_rectangle, make_regular_polygon, make_rhombus
from .mesh import TriMesh, refine, triangulate
from .oned import Exponents, pi_p, radial_dirichlet, radial_dirichlet_pq, weighted_neumann_1d
from .report import BoundReport, SweepTable

__version__ = "0.1.0"
