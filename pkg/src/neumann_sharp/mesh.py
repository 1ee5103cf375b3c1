"""Conforming P1 triangulations of convex polygons."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

from .geometry import ConvexPolygon

__all__ = ["TriMesh", "triangulate", "refine", "MeshError"]

MAX_VERTICES = 200_000


class MeshError(ValueError):
    pass


def _edges(tri: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unique sorted edges and how many triangles use each."""
    e = np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return uniq, counts


def _signed_areas(pts, tri):
    a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Vertices, positively oriented triangles and boundary flags."""

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    h: float

    def __post_init__(self):
        for name in ("vertices", "triangles", "boundary"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.triangles)

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    @property
    def edges(self) -> np.ndarray:
        return _edges(self.triangles)[0]

    @property
    def diameter(self) -> float:
        b = self.vertices[self.boundary]
        return float(np.max(np.linalg.norm(b[:, None] - b[None], axis=-1)))

    @property
    def max_edge(self) -> float:
        e = self.edges
        return float(np.max(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)))

    def transformed(self, matrix=None, shift=(0.0, 0.0)) -> "TriMesh":
        """Image under ``x -> A x + b``; orientation is restored if ``det A < 0``."""
        A = np.eye(2) if matrix is None else np.asarray(matrix, dtype=float)
        pts = self.vertices @ A.T + np.asarray(shift, dtype=float)
        tri = self.triangles if np.linalg.det(A) > 0 else self.triangles[:, [0, 2, 1]]
        scale = math.sqrt(abs(np.linalg.det(A)))
        return TriMesh(pts, tri, self.boundary, self.h * scale)

    def validate(self) -> None:
        """Raise ``MeshError`` unless orientation, size and conformity hold."""
        diam = self.diameter
        if np.any(self.areas <= 1e-14 * diam * diam):
            raise MeshError("degenerate or negatively oriented triangle")
        uniq, counts = _edges(self.triangles)
        if np.any(counts > 2):
            raise MeshError("edge shared by more than two triangles")
        on_bnd = np.zeros(self.n_vertices, bool)
        on_bnd[uniq[counts == 1].ravel()] = True
        if not np.array_equal(on_bnd, self.boundary):
            raise MeshError("boundary flags disagree with the edge structure")
        # Euler characteristic of a disc
        if self.n_vertices - len(uniq) + len(self.triangles) != 1:
            raise MeshError("mesh is not a topological disc")

    def write_csv(self, vertex_path, triangle_path) -> None:
        with open(vertex_path, "w") as fh:
            fh.write("index,x,y,boundary\n")
            for i, ((x, y), b) in enumerate(zip(self.vertices, self.boundary)):
                fh.write(f"{i},{x:.17g},{y:.17g},{int(b)}\n")
        with open(triangle_path, "w") as fh:
            fh.write("index,a,b,c\n")
            for i, (a, b, c) in enumerate(self.triangles):
                fh.write(f"{i},{a},{b},{c}\n")

    @classmethod
    def read_csv(cls, vertex_path, triangle_path, h=float("nan")) -> "TriMesh":
        v = np.loadtxt(Path(vertex_path), delimiter=",", skiprows=1)
        t = np.loadtxt(Path(triangle_path), delimiter=",", skiprows=1, dtype=int)
        return cls(v[:, 1:3], np.atleast_2d(t)[:, 1:4], v[:, 3].astype(bool), h)


def _boundary_points(poly: ConvexPolygon, h: float) -> np.ndarray:
    out = []
    for a, b in zip(*poly.edges):
        m = max(1, math.ceil(np.linalg.norm(b - a) / h - 1e-9))
        t = np.arange(m)[:, None] / m
        out.append(a + t * (b - a))
    return np.vstack(out)


def _lattice(poly: ConvexPolygon, h: float) -> np.ndarray:
    lo = poly.vertices.min(axis=0)
    hi = poly.vertices.max(axis=0)
    dy = h * math.sqrt(3) / 2
    ys = np.arange(lo[1], hi[1] + dy, dy)
    rows = []
    for j, y in enumerate(ys):
        xs = np.arange(lo[0] + (0.5 * h if j % 2 else 0.0), hi[0] + h, h)
        rows.append(np.column_stack([xs, np.full_like(xs, y)]))
    pts = np.vstack(rows)
    # centre the lattice inside the bounding box
    pts += 0.5 * ((hi - lo) - (pts.max(axis=0) - pts.min(axis=0)))
    return pts


def _delaunay(pts):
    """Delaunay simplices using every point.

    Flat triangles on the hull are dropped; points left out by that (or by
    Qhull itself) lie on a hull edge and are inserted afterwards by splitting
    the triangle that owns the edge.
    """
    scale = np.ptp(pts, axis=0).max()
    tri = Delaunay(pts).simplices
    # hull slivers through (nearly) collinear boundary points
    tri = tri[np.abs(_signed_areas(pts, tri)) > 1e-12 * scale * scale]
    missing = np.setdiff1d(np.arange(len(pts)), tri)
    if len(missing) == 0:
        return tri
    tri = [list(t) for t in tri]
    for k in missing:
        x = pts[k]
        for ti, t in enumerate(tri):
            for j in range(3):
                a, b, c = t[j], t[(j + 1) % 3], t[(j + 2) % 3]
                e = pts[b] - pts[a]
                u = (x - pts[a]) @ e / (e @ e)
                if 0 < u < 1 and np.linalg.norm(pts[a] + u * e - x) <= 1e-12 * scale:
                    tri[ti] = [a, k, c]
                    tri.append([k, b, c])
                    break
            else:
                continue
            break
        else:
            raise MeshError(f"could not insert boundary point {k}")
    return np.asarray(tri)


def _smooth(pts, tri, free, iters):
    """Laplacian smoothing of free vertices followed by re-triangulation."""
    for _ in range(iters):
        e = _edges(tri)[0]
        n = len(pts)
        acc = np.zeros_like(pts)
        deg = np.zeros(n)
        np.add.at(acc, e[:, 0], pts[e[:, 1]])
        np.add.at(acc, e[:, 1], pts[e[:, 0]])
        np.add.at(deg, e.ravel(), 1.0)
        new = pts.copy()
        new[free] = acc[free] / deg[free, None]
        pts = new
        tri = _delaunay(pts)
    return pts, tri


def triangulate(poly: ConvexPolygon, h: float, smooth: int = 3) -> TriMesh:
    """Delaunay mesh of ``poly`` with target edge length ``h``.

    Boundary nodes are spaced at most ``h`` along every edge (input vertices
    kept); interior nodes come from an equilateral lattice, thinned near the
    boundary and relaxed by a few Laplacian smoothing sweeps.
    """
    diam = poly.diameter
    if not 0 < h <= diam / 4:
        raise MeshError(f"need 0 < h <= diam/4 = {diam / 4:.6g}, got {h}")
    est = poly.area / (math.sqrt(3) / 4 * h * h) + len(poly) + poly.diameter * 4 / h
    if est > 2 * MAX_VERTICES:
        raise MeshError(f"h = {h} would need about {int(est / 2)} vertices")
    bnd = _boundary_points(poly, h)
    lat = _lattice(poly, h)
    keep = poly.contains(lat) & (poly.boundary_distance(lat) >= 0.5 * h)
    pts = np.vstack([bnd, lat[keep]])
    free = np.zeros(len(pts), bool)
    free[len(bnd):] = True
    tri = _delaunay(pts)
    if smooth:
        pts, tri = _smooth(pts, tri, free, smooth)
    for _ in range(8):
        e = _edges(tri)[0]
        long = np.linalg.norm(pts[e[:, 0]] - pts[e[:, 1]], axis=1) > 1.45 * h
        if not long.any():
            break
        mids = 0.5 * (pts[e[long, 0]] + pts[e[long, 1]])
        pts = np.vstack([pts, mids])
        free = np.concatenate([free, np.ones(len(mids), bool)])
        tri = _delaunay(pts)
    area = _signed_areas(pts, tri)
    tri = tri[np.abs(area) > 1e-12 * diam * diam]
    area = _signed_areas(pts, tri)
    tri = np.where((area < 0)[:, None], tri[:, [0, 2, 1]], tri)
    boundary = ~free
    mesh = TriMesh(pts, tri, boundary, h)
    mesh.validate()
    return mesh


def refine(mesh: TriMesh) -> TriMesh:
    """Split every triangle into four through its edge midpoints (nested mesh)."""
    tri = mesh.triangles
    e = np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
    uniq, inv, counts = np.unique(e, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    n = mesh.n_vertices
    mids = 0.5 * (mesh.vertices[uniq[:, 0]] + mesh.vertices[uniq[:, 1]])
    pts = np.vstack([mesh.vertices, mids])
    m = len(tri)
    m01, m12, m20 = (n + inv[:m], n + inv[m:2 * m], n + inv[2 * m:])
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    new = np.vstack([np.column_stack([a, m01, m20]), np.column_stack([m01, b, m12]),
                     np.column_stack([m20, m12, c]), np.column_stack([m01, m12, m20])])
    boundary = np.concatenate([mesh.boundary, counts == 1])
    out = TriMesh(pts, new, boundary, mesh.h / 2)
    return out
