"""Convex planar polygons and the constructions used on them.

A :class:`ConvexPolygon` is an immutable, strictly convex, counterclockwise
vertex chain. Besides area and diameter this module builds the two
diametral caps (the polygon intersected with the discs of radius
``diam / 2`` centred at the endpoints of a diameter), the rhombus family
of fixed diameter and shrinking width, and a few standard shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .report import BoundReport

__all__ = [
    "ConvexPolygon",
    "Cap",
    "convex_hull",
    "diameter",
    "diameter_pair",
    "area",
    "make_rhombus",
    "make_rectangle",
    "make_regular_polygon",
    "make_hexagon",
    "random_convex_polygon",
    "caps",
    "verify_normal_monotonicity",
    "check_isodiametric",
    "read_polygon",
    "write_polygon",
    "named_shape",
]


def _cross(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _max_spread(v: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)))


def _simplify(v: np.ndarray) -> np.ndarray:
    """Drop repeated and collinear vertices until the chain is stable."""
    scale = _max_spread(v)
    if scale == 0.0:
        raise ValueError("degenerate polygon: all vertices coincide")
    tol = 1e-12 * scale * scale
    changed = True
    while changed and len(v) >= 3:
        changed = False
        step = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        dup = step <= 1e-14 * scale
        if dup.any():
            v = v[~dup]
            changed = True
            continue
        cr = _cross(np.roll(v, 1, axis=0), v, np.roll(v, -1, axis=0))
        flat = np.abs(cr) <= tol
        if flat.any():
            # drop one at a time so a long straight run collapses to its ends
            v = np.delete(v, int(np.argmax(flat)), axis=0)
            changed = True
    return v


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex polygon with counterclockwise vertices.

    Clockwise input is reversed; repeated and collinear vertices are removed.
    Anything still not strictly convex raises ``ValueError``.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array")
        if len(v) < 3 or not np.all(np.isfinite(v)):
            raise ValueError("a polygon needs at least 3 finite vertices")
        v = _simplify(v)
        if len(v) < 3:
            raise ValueError("degenerate polygon: vertices are collinear")
        if _shoelace(v) < 0:
            v = v[::-1].copy()
        scale = _max_spread(v)
        cr = _cross(np.roll(v, 1, axis=0), v, np.roll(v, -1, axis=0))
        if np.any(cr <= 1e-12 * scale * scale):
            raise ValueError("vertex chain is not strictly convex")
        # a chain can turn left at every vertex and still wind twice
        turn = np.arctan2(cr, np.einsum("ij,ij->i", v - np.roll(v, 1, axis=0),
                                        np.roll(v, -1, axis=0) - v))
        if not math.isclose(float(turn.sum()), 2 * math.pi, rel_tol=1e-9):
            raise ValueError("vertex chain is self-intersecting")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ConvexPolygon) and self.vertices.shape == other.vertices.shape
                and bool(np.array_equal(self.vertices, other.vertices)))

    def __hash__(self) -> int:
        return hash(self.vertices.tobytes())

    @property
    def area(self) -> float:
        return _shoelace(self.vertices)

    @property
    def diameter(self) -> float:
        return diameter(self)

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cr = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        return (v + w).T @ cr / (6.0 * self.area)

    def translated(self, shift) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.asarray(shift, dtype=float))

    def scaled(self, factor: float) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices * float(factor))

    def rotated(self, angle: float) -> "ConvexPolygon":
        c, s = math.cos(angle), math.sin(angle)
        return ConvexPolygon(self.vertices @ np.array([[c, s], [-s, c]]))

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        """Boolean mask of points inside the closed polygon, up to ``tol`` (length)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a, b = self.edges
        e = b - a
        ln = np.linalg.norm(e, axis=1)
        d = pts[:, None, :] - a[None, :, :]
        signed = (e[None, :, 0] * d[..., 1] - e[None, :, 1] * d[..., 0]) / ln[None, :]
        return np.all(signed >= -tol, axis=1)

    def boundary_distance(self, pts) -> np.ndarray:
        """Euclidean distance from each point to the polygon boundary."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a, b = self.edges
        e = b - a
        d = pts[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("mnk,nk->mn", d, e) / np.einsum("nk,nk->n", e, e), 0.0, 1.0)
        foot = a[None, :, :] + t[..., None] * e[None, :, :]
        return np.min(np.linalg.norm(pts[:, None, :] - foot, axis=-1), axis=1)

    def describe(self) -> str:
        return f"polygon[{len(self)}] diam={self.diameter:.6g} area={self.area:.6g}"


@dataclass(frozen=True)
class Cap:
    """Polygonal inner approximation of ``polygon ∩ disc(center, radius)``."""

    polygon: ConvexPolygon
    center: np.ndarray
    radius: float
    arc_segments: int


def convex_hull(points) -> np.ndarray:
    """Counterclockwise convex hull (Andrew's monotone chain), collinear points dropped."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) < 3:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def diameter_pair(poly: ConvexPolygon) -> tuple[float, int, int]:
    """Diameter and the achieving vertex indices ``(i, j)``, ``i < j``.

    Candidate pairs come from rotating calipers over the antipodal vertex
    pairs; among pairs within ``1e-12`` (relative) of the maximum the
    lexicographically smallest index pair wins.
    """
    v = poly.vertices
    n = len(v)
    pairs = set()
    j = 1
    for i in range(n):
        i1 = (i + 1) % n
        edge = v[i1] - v[i]
        # advance j while the next vertex is farther from edge (i, i+1)
        while True:
            j1 = (j + 1) % n
            cur = abs(edge[0] * (v[j, 1] - v[i, 1]) - edge[1] * (v[j, 0] - v[i, 0]))
            nxt = abs(edge[0] * (v[j1, 1] - v[i, 1]) - edge[1] * (v[j1, 0] - v[i, 0]))
            if nxt > cur * (1 + 1e-12):
                j = j1
            else:
                break
        for a in (i, i1):
            for b in (j, (j + 1) % n):
                if a != b:
                    pairs.add((min(a, b), max(a, b)))
    pairs = sorted(pairs)
    dist = np.array([np.linalg.norm(v[a] - v[b]) for a, b in pairs])
    best = float(dist.max())
    for (a, b), dd in zip(pairs, dist):
        if dd >= best * (1 - 1e-12):
            return best, a, b
    raise AssertionError("unreachable")


def diameter(poly: ConvexPolygon) -> float:
    return diameter_pair(poly)[0]


def area(poly: ConvexPolygon) -> float:
    return poly.area


def make_rhombus(d: float, k: float) -> ConvexPolygon:
    """Rhombus with diagonals ``d`` (along x) and ``d / k`` (along y)."""
    if d <= 0 or k < 1:
        raise ValueError("need d > 0 and k >= 1")
    a, b = d / 2.0, d / (2.0 * k)
    return ConvexPolygon([(a, 0.0), (0.0, b), (-a, 0.0), (0.0, -b)])


def make_rectangle(length: float, width: float) -> ConvexPolygon:
    if length <= 0 or width <= 0:
        raise ValueError("rectangle sides must be positive")
    a, b = length / 2.0, width / 2.0
    return ConvexPolygon([(-a, -b), (a, -b), (a, b), (-a, b)])


def make_regular_polygon(n: int, circumradius: float = 1.0) -> ConvexPolygon:
    if n < 3 or circumradius <= 0:
        raise ValueError("need n >= 3 and a positive circumradius")
    t = 2 * np.pi * np.arange(n) / n
    return ConvexPolygon(circumradius * np.column_stack([np.cos(t), np.sin(t)]))


def make_hexagon(a: float = 1.0, b: float = 1.0, c: float = 0.5) -> ConvexPolygon:
    """Centrally and axially symmetric hexagon with vertices (±a, 0), (±c, ±b)."""
    return ConvexPolygon([(a, 0.0), (c, b), (-c, b), (-a, 0.0), (-c, -b), (c, -b)])


def random_convex_polygon(rng: np.random.Generator, n_points: int = 12,
                          min_aspect: float = 0.2) -> ConvexPolygon:
    """Hull of random points on a random ellipse, jittered inward."""
    t = np.sort(rng.uniform(0, 2 * np.pi, n_points))
    aspect = rng.uniform(min_aspect, 1.0)
    r = rng.uniform(0.7, 1.0, n_points)
    pts = np.column_stack([r * np.cos(t), aspect * r * np.sin(t)])
    poly = ConvexPolygon(convex_hull(pts))
    return poly.rotated(rng.uniform(0, np.pi))


def _circle_crossings(poly: ConvexPolygon, c: np.ndarray, r: float) -> list[np.ndarray]:
    out = []
    a, b = poly.edges
    for p0, p1 in zip(a, b):
        e = p1 - p0
        f = p0 - c
        qa, qb, qc = e @ e, 2 * f @ e, f @ f - r * r
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            continue
        sq = math.sqrt(disc)
        for t in ((-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)):
            if 0.0 <= t <= 1.0:
                out.append(p0 + t * e)
    return out


def _cap(poly: ConvexPolygon, c: np.ndarray, r: float, arc_segments: int) -> Cap:
    v = poly.vertices
    inside = v[np.linalg.norm(v - c, axis=1) <= r]
    cross = _circle_crossings(poly, c, r)
    pts = [inside] + [np.atleast_2d(p) for p in cross]
    if cross:
        ang = np.sort(np.unique(np.round(
            [math.atan2(p[1] - c[1], p[0] - c[0]) for p in cross], 15)))
        ext = np.append(ang, ang[0] + 2 * np.pi)
        diam = poly.diameter
        for t0, t1 in zip(ext[:-1], ext[1:]):
            mid = 0.5 * (t0 + t1)
            probe = c + r * np.array([math.cos(mid), math.sin(mid)])
            if poly.contains(probe, tol=1e-12 * diam)[0]:
                t = np.linspace(t0, t1, arc_segments + 1)
                pts.append(c + r * np.column_stack([np.cos(t), np.sin(t)]))
    hull = convex_hull(np.vstack(pts))
    return Cap(ConvexPolygon(hull), c.copy(), r, arc_segments)


def caps(poly: ConvexPolygon, arc_segments: int = 64) -> tuple[Cap, Cap]:
    """The two caps at the diametral vertex pair ``(x0, x1)``.

    Each cap polygon is the convex hull of points of the true cap (polygon
    vertices inside the disc, edge/circle crossings, and arc samples), so it
    is an inscribed approximation contained in both the polygon and the disc.
    """
    d, i, j = diameter_pair(poly)
    v = poly.vertices
    return (_cap(poly, v[i], d / 2.0, arc_segments),
            _cap(poly, v[j], d / 2.0, arc_segments))


def verify_normal_monotonicity(poly: ConvexPolygon, x0) -> bool:
    """``<x - x0, nu(x)> >= 0`` at every edge midpoint, ``nu`` the outer normal."""
    x0 = np.asarray(x0, dtype=float)
    d = poly.diameter
    if poly.boundary_distance(x0)[0] >= 1e-9 * d:
        raise ValueError("x0 is not on the polygon boundary")
    a, b = poly.edges
    e = b - a
    nu = np.column_stack([e[:, 1], -e[:, 0]]) / np.linalg.norm(e, axis=1)[:, None]
    mid = 0.5 * (a + b)
    return bool(np.all(np.einsum("ij,ij->i", mid - x0, nu) >= -1e-12 * d))


def check_isodiametric(poly: ConvexPolygon) -> BoundReport:
    """``|Omega| <= pi (diam / 2)^2``."""
    d = poly.diameter
    return BoundReport("isodiametric", poly.area, math.pi * d * d / 4.0, "<=", tol=1e-12,
                       context={"polygon": poly.describe()})


def read_polygon(path) -> ConvexPolygon:
    """Read ``x y`` pairs, one per line; blank lines and ``#`` comments ignored."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            x, y = line.replace(",", " ").split()
            rows.append((float(x), float(y)))
    return ConvexPolygon(rows)


def write_polygon(path, poly: ConvexPolygon) -> None:
    Path(path).write_text("".join(f"{x:.17g} {y:.17g}\n" for x, y in poly.vertices))


def named_shape(name: str, **params) -> ConvexPolygon:
    """Build a named shape: square, rectangle, rhombus, regular/ngon, hex, disc."""
    name = name.lower()
    if name == "square":
        return make_rectangle(params.get("side", 1.0), params.get("side", 1.0))
    if name == "rectangle":
        return make_rectangle(params.get("length", 1.0), params.get("width", 0.5))
    if name == "rhombus":
        return make_rhombus(params.get("d", 2.0), params.get("k", 1))
    if name in ("regular", "ngon"):
        return make_regular_polygon(int(params.get("n", 6)), params.get("radius", 1.0))
    if name == "hex":
        return make_regular_polygon(6, params.get("radius", 1.0))
    if name == "disc":
        return make_regular_polygon(int(params.get("n", 64)), params.get("radius", 1.0))
    raise ValueError(f"unknown shape {name!r}")
