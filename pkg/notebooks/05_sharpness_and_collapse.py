"""
Sharpness on rhombi and collapse on thin rectangles
===================================================

Rhombi with diagonals d and d/k degenerate to a segment as k grows, and
their Neumann eigenvalue rises toward the ball value from below. Thin
rectangles instead send mu_{p,q} to zero when q > p and to infinity when
q < p.
"""

from neumann_sharp import bounds

for p in (1.5, 2.0, 3.0):
    table = bounds.sharpness_sweep(p, 2.0, [1, 2, 4, 8])
    print(f"p={p}", table.flags)
    print(table.to_csv())

for p, q in ((2.0, 3.0), (3.0, 2.0), (2.0, 2.0)):
    table = bounds.collapse_sweep(p, q, [0.2, 0.1, 0.05])
    print(f"p={p} q={q}", table.flags)
    print(table.to_csv())

# exploratory search for the best regular polygon, scale-free objective
res = bounds.shape_search(2.0, 2.5, "regular", budget=8)
print("best n:", res.best_param, "objective:", res.best_value, "certified:", res.certified)
