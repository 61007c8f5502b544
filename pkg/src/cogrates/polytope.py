"""Geometry kernel: vertex enumeration, projections, hulls, and slices.

Rate polytopes here are small (dimension at most 6, a few dozen
inequalities) and every coordinate is capped, so vertices are enumerated
combinatorially: solve every well-conditioned d-subset of the constraint
rows (axis planes included) and keep the feasible solutions.  Exactness
matters more than speed; region quality drives every figure downstream.

2D hulls use the monotone chain; 3D hull structure (needed for clipping
and cross sections of accumulated point clouds) is delegated to Qhull.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

FEAS_TOL = 1e-7
DEDUP_TOL = 1e-9
COND_CAP = 1e12
MAX_SUBSETS = 10_000_000

AXIS_INDEX = {"r1": 0, "r2": 1, "r3": 2}


class PolytopeError(ValueError):
    pass


class UnboundedPolytopeError(PolytopeError):
    pass


def axis_number(axis) -> int:
    if isinstance(axis, str):
        try:
            return AXIS_INDEX[axis]
        except KeyError:
            raise PolytopeError(f"axis must be one of {tuple(AXIS_INDEX)}, got {axis!r}")
    axis = int(axis)
    if axis not in (0, 1, 2):
        raise PolytopeError(f"axis index out of range: {axis}")
    return axis


@dataclass(frozen=True)
class HalfspaceSystem:
    """A x <= b together with implicit nonnegativity of every coordinate."""

    a_matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_matrix, dtype=float))
        b = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
            raise PolytopeError(f"inconsistent shapes {a.shape} / {b.shape}")
        if a.shape[1] > 6:
            raise PolytopeError(f"dimension {a.shape[1]} exceeds 6")
        if a.shape[0] > 64:
            raise PolytopeError(f"{a.shape[0]} inequalities exceed 64")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise PolytopeError("system entries must be finite")
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "rhs", b)

    @property
    def dim(self) -> int:
        return self.a_matrix.shape[1]

    def with_row(self, coeffs, rhs_value: float) -> "HalfspaceSystem":
        a = np.vstack([self.a_matrix, np.asarray(coeffs, dtype=float)])
        b = np.concatenate([self.rhs, [float(rhs_value)]])
        return HalfspaceSystem(a, b)


@dataclass(frozen=True)
class VertexSet:
    """Deduplicated polytope vertices, canonically (lexicographically) sorted."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "points", np.atleast_2d(np.asarray(self.points, dtype=float))
        )

    def __len__(self) -> int:
        return 0 if self.points.size == 0 else self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _lex_sort(points: np.ndarray) -> np.ndarray:
    if points.shape[0] <= 1:
        return points
    order = np.lexsort(points.T[::-1])
    return points[order]


def dedup_points(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Drop near-duplicate rows (Euclidean distance <= tol), keeping the
    lexicographically first representative."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        return points
    pts = _lex_sort(np.unique(points, axis=0))
    kept: list[np.ndarray] = []
    for p in pts:
        if all(np.dot(p - k, p - k) > tol * tol for k in kept):
            kept.append(p)
    return np.array(kept)


class VertexEnumerator:
    """Reusable vertex enumeration for a fixed coefficient pattern.

    The region driver evaluates the same 0/1 pattern against thousands of
    right-hand sides, so subset selection, conditioning filter and matrix
    inverses are computed once; solving for one rhs is then a gather and
    a batched matrix-vector product.
    """

    def __init__(self, a_matrix: np.ndarray):
        a = np.atleast_2d(np.asarray(a_matrix, dtype=float))
        m, d = a.shape
        self.a_matrix = a
        self.dim = d
        self._check_bounded(a)
        rows = np.vstack([a, -np.eye(d)])
        n_rows = m + d
        if math.comb(n_rows, d) > MAX_SUBSETS:
            raise PolytopeError(
                f"{math.comb(n_rows, d)} constraint subsets exceed the "
                f"{MAX_SUBSETS} cap"
            )
        subsets = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(n_rows), d)),
            dtype=np.intp,
        ).reshape(-1, d)
        keep_chunks = []
        inv_chunks = []
        chunk = 65536
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for lo in range(0, subsets.shape[0], chunk):
                sub = subsets[lo : lo + chunk]
                mats = rows[sub]
                conds = np.linalg.cond(mats)
                good = np.isfinite(conds) & (conds <= COND_CAP)
                keep_chunks.append(sub[good])
                if np.any(good):
                    inv_chunks.append(np.linalg.inv(mats[good]))
        self.subsets = (
            np.concatenate(keep_chunks) if keep_chunks else np.zeros((0, d), np.intp)
        )
        self.inverses = (
            np.concatenate(inv_chunks) if inv_chunks else np.zeros((0, d, d))
        )

    @staticmethod
    def _check_bounded(a: np.ndarray) -> None:
        m, d = a.shape
        nonneg = np.all(a >= 0.0, axis=1) if m else np.zeros(0, bool)
        for j in range(d):
            if m == 0 or not np.any(nonneg & (a[:, j] > 0.0)):
                raise UnboundedPolytopeError(
                    f"coordinate {j} has no upper bound; the polytope is unbounded"
                )

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self.subsets.shape[0] == 0:
            return np.zeros((0, self.dim))
        b_aug = np.concatenate([b, np.zeros(self.dim)])
        x = np.einsum("kij,kj->ki", self.inverses, b_aug[self.subsets])
        row_tol = FEAS_TOL * (1.0 + np.abs(b))
        ok = np.all(x @ self.a_matrix.T <= b + row_tol, axis=1)
        ok &= np.all(x >= -FEAS_TOL, axis=1)
        return dedup_points(x[ok])


def enumerate_vertices(system: HalfspaceSystem) -> VertexSet:
    """All vertices of {x >= 0 : A x <= b}; the system must cap every
    coordinate (rate systems always do via their single-rate bounds)."""
    return VertexSet(VertexEnumerator(system.a_matrix).solve(system.rhs))


def project(vertices: VertexSet, mapping: np.ndarray) -> VertexSet:
    """Image of a vertex set under a linear map (k x d matrix).

    The hull of the image equals the image of the hull, so projecting
    vertices is exact for the projected polytope.
    """
    mapping = np.atleast_2d(np.asarray(mapping, dtype=float))
    if vertices.points.size == 0:
        return VertexSet(np.zeros((0, mapping.shape[0])))
    if mapping.shape[1] != vertices.dim:
        raise PolytopeError(
            f"map expects dimension {mapping.shape[1]}, vertices have {vertices.dim}"
        )
    return VertexSet(dedup_points(vertices.points @ mapping.T))


def convex_hull_2d(points) -> np.ndarray:
    """Counterclockwise hull polygon via the monotone chain.

    Collinear interior points are dropped; all-collinear input returns the
    two extreme points; a single point returns itself.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise PolytopeError("convex_hull_2d needs at least one point")
    if pts.shape[1] != 2:
        raise PolytopeError(f"expected 2D points, got dimension {pts.shape[1]}")
    pts = _lex_sort(np.unique(pts, axis=0))
    if pts.shape[0] == 1:
        return pts.copy()

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) > 1 and cross(out[-2], out[-1], p) <= 0.0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        # collinear input: keep the extreme pair
        return np.array([pts[0], pts[-1]])
    return np.array(hull)


def point_in_polygon_ccw(polygon: np.ndarray, points, tol: float = 1e-9) -> np.ndarray:
    """Vectorized membership test against a CCW convex polygon.

    Degenerate polygons (segment or single point) are handled by distance.
    """
    polygon = np.atleast_2d(np.asarray(polygon, dtype=float))
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return np.zeros(0, dtype=bool)
    if polygon.size == 0:
        return np.zeros(pts.shape[0], dtype=bool)
    if polygon.shape[0] == 1:
        return np.linalg.norm(pts - polygon[0], axis=1) <= tol
    if polygon.shape[0] == 2:
        p, q = polygon
        d = q - p
        seg_len2 = float(d @ d)
        t = np.clip((pts - p) @ d / seg_len2, 0.0, 1.0) if seg_len2 > 0 else 0.0
        closest = p + np.outer(t, d) if seg_len2 > 0 else np.broadcast_to(p, pts.shape)
        return np.linalg.norm(pts - closest, axis=1) <= tol
    ok = np.ones(pts.shape[0], dtype=bool)
    for i in range(polygon.shape[0]):
        p = polygon[i]
        q = polygon[(i + 1) % polygon.shape[0]]
        edge = q - p
        ok &= (edge[0] * (pts[:, 1] - p[1]) - edge[1] * (pts[:, 0] - p[0])) >= -tol
    return ok


def downward_closure_2d(points: np.ndarray) -> np.ndarray:
    """Augment nonnegative 2D points with their axis shadows so that the
    hull of the result is closed under componentwise decrease."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return pts
    zx = np.column_stack([pts[:, 0], np.zeros(len(pts))])
    zy = np.column_stack([np.zeros(len(pts)), pts[:, 1]])
    return np.vstack([pts, zx, zy, [[0.0, 0.0]]])


def downward_closure_3d(points: np.ndarray) -> np.ndarray:
    """All componentwise-masked copies of nonnegative 3D points; the hull
    of the result is the downward closure of the hull inside the orthant."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return pts
    out = []
    for mask in itertools.product((0.0, 1.0), repeat=3):
        out.append(pts * np.asarray(mask))
    return np.unique(np.vstack(out), axis=0)


class Hull3D:
    """Convex hull of a 3D point cloud with clipping and slicing support.

    Handles rank-deficient clouds (flat or lower) explicitly so that
    degenerate regions, e.g. a region pinned to a coordinate plane by a
    zero rate cap, still slice and project correctly.
    """

    def __init__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.size == 0:
            pts = np.zeros((0, 3))
        if pts.size and pts.shape[1] != 3:
            raise PolytopeError("Hull3D expects 3D points")
        pts = np.unique(pts, axis=0)
        self._empty = pts.shape[0] == 0
        self._qhull = None
        self._vertices = pts
        self._edges: list[tuple[int, int]] | None = None
        if pts.shape[0] >= 4:
            centered = pts - pts.mean(axis=0)
            svals = np.linalg.svd(centered, compute_uv=False)
            scale = max(svals[0], 1.0)
            if svals[2] > 1e-9 * scale:
                try:
                    self._qhull = ConvexHull(pts)
                except QhullError:
                    self._qhull = None
        if self._qhull is not None:
            self._vertices = pts[self._qhull.vertices]

    @property
    def is_empty(self) -> bool:
        return self._empty

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    def _edge_list(self) -> list[tuple[int, int]]:
        """Vertex-index pairs covering all hull edges (facet triangulation
        diagonals are harmless: they lie inside facets)."""
        if self._edges is not None:
            return self._edges
        v = self._vertices
        n = v.shape[0]
        if self._qhull is not None:
            remap = {orig: i for i, orig in enumerate(self._qhull.vertices)}
            pairs = set()
            for simplex in self._qhull.simplices:
                s = [remap[i] for i in simplex]
                for i in range(3):
                    e = (s[i], s[(i + 1) % 3])
                    pairs.add((min(e), max(e)))
            self._edges = sorted(pairs)
        else:
            # flat cloud: every pair (n is small after deduplication)
            self._edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
        return self._edges

    def clip(self, normal, offset: float, tol: float = 1e-12) -> "Hull3D":
        """Intersect with the halfspace normal . x <= offset."""
        if self._empty:
            return self
        normal = np.asarray(normal, dtype=float)
        v = self._vertices
        side = v @ normal - offset
        scale = max(1.0, float(np.abs(side).max()))
        inside = side <= tol * scale
        if np.all(inside):
            return self
        kept = [v[i] for i in np.nonzero(inside)[0]]
        for i, j in self._edge_list():
            si, sj = side[i], side[j]
            if (si > 0) != (sj > 0) and si != sj:
                t = si / (si - sj)
                if 0.0 <= t <= 1.0:
                    kept.append(v[i] + t * (v[j] - v[i]))
        if not kept:
            return Hull3D(np.zeros((0, 3)))
        return Hull3D(np.array(kept))

    def restrict_min(self, axis, c: float) -> "Hull3D":
        ax = axis_number(axis)
        normal = np.zeros(3)
        normal[ax] = -1.0
        return self.clip(normal, -float(c))

    def project_drop(self, axis) -> np.ndarray:
        """Drop one coordinate; returns the projected vertex candidates."""
        ax = axis_number(axis)
        keep = [i for i in range(3) if i != ax]
        return self._vertices[:, keep] if not self._empty else np.zeros((0, 2))

    def view(self, mapping: np.ndarray) -> np.ndarray:
        """Image of the hull's vertices under a 2 x 3 linear map."""
        mapping = np.asarray(mapping, dtype=float)
        return self._vertices @ mapping.T if not self._empty else np.zeros((0, 2))

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self._empty:
            return np.zeros(pts.shape[0], dtype=bool)
        if self._qhull is not None:
            eq = self._qhull.equations
            vals = pts @ eq[:, :3].T + eq[:, 3]
            return np.all(vals <= tol, axis=1)
        # flat fallback: within tol of the affine span and inside its hull
        v = self._vertices
        base = v[0]
        if v.shape[0] == 1:
            return np.linalg.norm(pts - base, axis=1) <= tol
        u, s, vt = np.linalg.svd(v - base.reshape(1, 3), full_matrices=False)
        rank = int(np.sum(s > 1e-9 * max(s[0], 1.0)))
        basis = vt[:rank]
        rel = pts - base
        residual = rel - (rel @ basis.T) @ basis
        on_plane = np.linalg.norm(residual, axis=1) <= max(tol, 1e-9)
        coords = rel @ basis.T
        vcoords = (v - base) @ basis.T
        if rank == 1:
            lo, hi = float(vcoords.min()), float(vcoords.max())
            inside = (coords[:, 0] >= lo - tol) & (coords[:, 0] <= hi + tol)
        else:
            poly = convex_hull_2d(vcoords)
            inside = point_in_polygon_ccw(poly, coords, tol=max(tol, 1e-9))
        return on_plane & inside

    def max_along(self, direction) -> float:
        if self._empty:
            return float("nan")
        direction = np.asarray(direction, dtype=float)
        return float(np.max(self._vertices @ direction))


def slice_min_rate(obj, axis, c: float) -> VertexSet:
    """Intersect a 3D region with {rate_axis >= c} and project the
    constrained axis out.

    For a halfspace system the slice plane is appended before vertex
    enumeration; for a point cloud the hull is clipped exactly through its
    edge structure.  An empty result simply means c exceeds the axis
    maximum.
    """
    c = float(c)
    if c < 0:
        raise PolytopeError(f"slice value must be >= 0, got {c}")
    ax = axis_number(axis)
    keep = [i for i in range(3) if i != ax]
    if isinstance(obj, HalfspaceSystem):
        if obj.dim != 3:
            raise PolytopeError("slice_min_rate expects a 3D halfspace system")
        row = np.zeros(3)
        row[ax] = -1.0
        sliced = obj.with_row(row, -c)
        try:
            verts = enumerate_vertices(sliced).points
        except UnboundedPolytopeError:
            raise
        return VertexSet(dedup_points(verts[:, keep]) if verts.size else
                         np.zeros((0, 2)))
    points = obj.points if isinstance(obj, VertexSet) else np.asarray(obj, float)
    hull = Hull3D(points)
    restricted = hull.restrict_min(ax, c)
    if restricted.is_empty:
        return VertexSet(np.zeros((0, 2)))
    return VertexSet(dedup_points(restricted.project_drop(ax)))
