"""
Checking the eigenvalue inequalities
====================================

Each check returns a report with both sides, the relation and the margin.
Upper bounds compare the discrete Neumann value (which sits above the true
one) directly; lower bounds ask for a margin of three times the change seen
under one uniform refinement.
"""

from neumann_sharp import bounds
from neumann_sharp.fem2d import two_cap_quotient
from neumann_sharp.geometry import make_hexagon, make_rectangle, make_rhombus
from neumann_sharp.mesh import triangulate

shapes = {
    "square": make_rectangle(1, 1),
    "rhombus k=4": make_rhombus(2, 4),
    "hexagon": make_hexagon(1.0, 0.8, 0.4),
}

for name, poly in shapes.items():
    print(f"--- {name}")
    for report in (bounds.check_main(poly, 2), bounds.check_measure(poly, 2),
                   bounds.check_pw(poly, 2), bounds.check_pq_upper(poly, 2, 3),
                   bounds.check_pq_lower(poly, 3, 2), bounds.check_debole(poly, 2, 2.5)):
        print(report.summary())

# the test function behind the upper bound: two balanced caps at a diametral pair
sq = make_rectangle(1, 1)
value, info = two_cap_quotient(sq, 2.0, return_details=True)
print("two-cap quotient on the square:", value, "ball value:", info["ball_eigenvalue"])

# Hoelder comparison between exponents on one mesh
for r in bounds.check_comparison(triangulate(make_rectangle(2, 1), 0.05), 2.0, 2.0, 2.5):
    print(r.summary(), "factor", r.context["factor"])
