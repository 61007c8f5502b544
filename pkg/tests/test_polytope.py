import itertools

import numpy as np
import pytest

from cogrates.polytope import (
    FEAS_TOL,
    HalfspaceSystem,
    Hull3D,
    PolytopeError,
    UnboundedPolytopeError,
    VertexSet,
    convex_hull_2d,
    dedup_points,
    downward_closure_2d,
    downward_closure_3d,
    enumerate_vertices,
    point_in_polygon_ccw,
    project,
    slice_min_rate,
)


def as_set(points, digits=7):
    return {tuple(np.round(p, digits)) for p in np.atleast_2d(points)}


def test_enumerate_two_caps_and_sum():
    system = HalfspaceSystem(np.array([[1.0, 0], [0, 1], [1, 1]]),
                             np.array([1.0, 1.0, 1.5]))
    verts = enumerate_vertices(system)
    assert as_set(verts.points) == {(0, 0), (1, 0), (0, 1), (1, 0.5), (0.5, 1)}


def test_enumerate_origin_only():
    system = HalfspaceSystem(np.eye(2), np.zeros(2))
    assert as_set(enumerate_vertices(system).points) == {(0, 0)}


def test_enumerate_unbounded_reported():
    with pytest.raises(UnboundedPolytopeError):
        enumerate_vertices(HalfspaceSystem(np.zeros((0, 2)), np.zeros(0)))
    with pytest.raises(UnboundedPolytopeError):
        enumerate_vertices(HalfspaceSystem(np.array([[1.0, 0.0]]),
                                           np.array([1.0])))


def test_enumerate_box_and_simplex_counts():
    for d in (2, 3, 4):
        box = HalfspaceSystem(np.eye(d), np.ones(d))
        assert len(enumerate_vertices(box)) == 2 ** d
        simplex = HalfspaceSystem(np.ones((1, d)), np.array([1.0]))
        assert len(enumerate_vertices(simplex)) == d + 1


def test_enumerate_skips_parallel_rows():
    # duplicated constraint rows create singular subsets; they are skipped
    system = HalfspaceSystem(np.array([[1.0, 0], [1.0, 0], [0, 1]]),
                             np.array([1.0, 1.0, 1.0]))
    assert as_set(enumerate_vertices(system).points) == {
        (0, 0), (1, 0), (0, 1), (1, 1)}


def test_vertices_satisfy_all_inequalities():
    rng = np.random.default_rng(2)
    for _ in range(25):
        d = int(rng.integers(2, 5))
        m = int(rng.integers(1, 5))
        a = np.vstack([np.eye(d), rng.uniform(0, 1, size=(m, d))])
        b = np.concatenate([rng.uniform(0.5, 2, size=d),
                            rng.uniform(0.5, 3, size=m)])
        verts = enumerate_vertices(HalfspaceSystem(a, b)).points
        assert len(verts) >= 1
        assert np.all(verts @ a.T <= b + 1e-7 * (1 + np.abs(b)))
        assert np.all(verts >= -FEAS_TOL)
        # pairwise deduplication
        if len(verts) > 1:
            diffs = verts[:, None, :] - verts[None, :, :]
            dist = np.linalg.norm(diffs, axis=2)
            assert dist[~np.eye(len(verts), dtype=bool)].min() > 1e-9


def test_project_examples():
    scheme2 = np.array([[1, 0, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 0, 1, 1]],
                       dtype=float)
    vs = VertexSet(np.array([[1, 0.5, 0.25, 0.3, 0.2]]))
    assert as_set(project(vs, scheme2).points) == {(1.0, 0.75, 0.5)}
    square = VertexSet(np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float))
    assert as_set(project(square, np.eye(2)).points) == as_set(square.points)
    sums = project(square, np.array([[1.0, 1.0]]))
    assert as_set(sums.points) == {(0.0,), (1.0,), (2.0,)}
    with pytest.raises(PolytopeError):
        project(square, np.eye(3))


def test_hull_drops_interior_point():
    poly = convex_hull_2d([[0, 0], [1, 0], [0, 1], [0.2, 0.2]])
    assert as_set(poly) == {(0, 0), (1, 0), (0, 1)}


def test_hull_degenerate_inputs():
    assert convex_hull_2d([[0.5, 0.5]]).tolist() == [[0.5, 0.5]]
    seg = convex_hull_2d([[0, 0], [2, 2], [1, 1]])
    assert as_set(seg) == {(0, 0), (2, 2)}
    with pytest.raises(PolytopeError):
        convex_hull_2d(np.zeros((0, 2)))


def test_hull_is_ccw_and_idempotent():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(60, 2))
    poly = convex_hull_2d(pts)
    area2 = 0.0
    for i in range(len(poly)):
        p, q = poly[i], poly[(i + 1) % len(poly)]
        area2 += p[0] * q[1] - q[0] * p[1]
    assert area2 > 0  # counterclockwise
    assert np.array_equal(convex_hull_2d(poly), poly)


def brute_force_hull_indices(pts):
    """Cubic-time oracle: a point is a hull vertex iff it is not a convex
    combination witness, i.e. some line through it has all points on one
    side with the point extreme on that line."""
    n = len(pts)
    hull = set()
    for i, j in itertools.permutations(range(n), 2):
        d = pts[j] - pts[i]
        cross = (d[0] * (pts[:, 1] - pts[i][1])
                 - d[1] * (pts[:, 0] - pts[i][0]))
        if np.all(cross >= -1e-12) or np.all(cross <= 1e-12):
            hull.add(i)
            hull.add(j)
    return hull


def test_hull_matches_cubic_oracle_on_random_disc():
    rng = np.random.default_rng(4)
    angles = rng.uniform(0, 2 * np.pi, size=100)
    radii = np.sqrt(rng.uniform(0, 1, size=100))
    pts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    poly = convex_hull_2d(pts)
    oracle = brute_force_hull_indices(pts)
    assert as_set(poly) == as_set(pts[sorted(oracle)])
    # the farthest point from the origin is always a hull vertex
    far = pts[np.linalg.norm(pts, axis=1).argmax()]
    assert tuple(np.round(far, 7)) in as_set(poly)


def test_slice_examples():
    box = HalfspaceSystem(np.eye(3), np.ones(3))
    sl = slice_min_rate(box, "r1", 0.0)
    assert as_set(sl.points) == {(0, 0), (1, 0), (0, 1), (1, 1)}
    assert len(slice_min_rate(box, "r1", 2.0)) == 0
    simplex = HalfspaceSystem(np.vstack([np.ones((1, 3)), np.eye(3)]),
                              np.array([3.0, 3, 3, 3]))
    tri = slice_min_rate(simplex, "r1", 1.0)
    assert as_set(tri.points) == {(0, 0), (2, 0), (0, 2)}
    with pytest.raises(PolytopeError):
        slice_min_rate(box, "r1", -0.5)
    with pytest.raises(PolytopeError):
        slice_min_rate(box, "r9", 0.0)


def test_slice_point_cloud_input():
    cube = np.array(list(itertools.product((0.0, 1.0), repeat=3)))
    sl = slice_min_rate(cube, "r3", 0.5)
    assert as_set(sl.points) == {(0, 0), (1, 0), (0, 1), (1, 1)}
    assert len(slice_min_rate(cube, "r3", 1.5)) == 0


def test_slice_grid_scan_agreement():
    rng = np.random.default_rng(5)
    a = np.vstack([np.eye(3), rng.uniform(0.2, 1.0, size=(2, 3))])
    b = np.concatenate([rng.uniform(0.5, 1.2, size=3),
                        rng.uniform(0.8, 2.0, size=2)])
    c = 0.3
    poly = convex_hull_2d(slice_min_rate(HalfspaceSystem(a, b), "r1", c).points)
    grid = np.arange(0, 1.3, 0.02)
    gx, gy = np.meshgrid(grid, grid)
    pts2 = np.column_stack([gx.ravel(), gy.ravel()])
    pts3 = np.column_stack([np.full(len(pts2), c), pts2])
    feasible = np.all(pts3 @ a.T <= b + 1e-12, axis=1)
    assert point_in_polygon_ccw(poly, pts2[feasible], tol=1e-6).all()


def test_point_in_polygon_degenerate():
    assert point_in_polygon_ccw(np.array([[1.0, 1.0]]), [[1, 1]], tol=1e-9)[0]
    seg = np.array([[0.0, 0.0], [1.0, 1.0]])
    res = point_in_polygon_ccw(seg, [[0.5, 0.5], [0.5, 0.6]], tol=1e-9)
    assert res.tolist() == [True, False]


def test_downward_closures():
    pts2 = downward_closure_2d(np.array([[1.0, 2.0]]))
    assert as_set(pts2) >= {(1, 2), (1, 0), (0, 2), (0, 0)}
    pts3 = downward_closure_3d(np.array([[1.0, 1.0, 1.0]]))
    assert len(pts3) == 8


def test_hull3d_clip_and_contains():
    cube = np.array(list(itertools.product((0.0, 1.0), repeat=3)))
    hull = Hull3D(cube)
    assert hull.contains([[0.5, 0.5, 0.5]])[0]
    assert not hull.contains([[1.2, 0.5, 0.5]])[0]
    clipped = hull.clip(np.array([1.0, 1.0, 0.0]), 1.0)
    assert clipped.contains([[0.5, 0.5, 0.9]])[0]
    assert not clipped.contains([[0.9, 0.9, 0.5]])[0]
    flat = hull.clip(np.array([0.0, 0.0, 1.0]), 0.0)
    assert flat.contains([[0.5, 0.5, 0.0]])[0]
    assert not flat.contains([[0.5, 0.5, 0.2]])[0]


def test_dedup_points_tolerance():
    pts = np.array([[0.0, 0.0], [0.0, 5e-10], [1.0, 0.0]])
    out = dedup_points(pts)
    assert len(out) == 2


def test_system_validation():
    with pytest.raises(PolytopeError):
        HalfspaceSystem(np.ones((1, 7)), np.ones(1))
    with pytest.raises(PolytopeError):
        HalfspaceSystem(np.ones((65, 2)), np.ones(65))
    with pytest.raises(PolytopeError):
        HalfspaceSystem(np.array([[np.inf, 0.0]]), np.ones(1))
