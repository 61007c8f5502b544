import math

import numpy as np
import pytest

from cogrates.achievable import SamplingSpec, compute_region
from cogrates.corollaries import (
    ALL_IDS,
    corollary_points,
    points_array,
    r2_max_interference_limited,
    scheme_for_corollary,
    time_share_hull,
)
from cogrates.model import ChannelConfig, ConfigError, Scheme, validate_config
from cogrates.outerbound import outer_region


def half_log2(x):
    return 0.5 * math.log10(x) / math.log10(2.0)


@pytest.fixture(scope="module")
def cfg():
    return validate_config({})


def by_axis(points, axis):
    return sorted(p.point.as_tuple()[axis] for p in points)


def test_family_1_values(cfg):
    """Full-help and full-cancellation rates recomputed with independent
    arithmetic (log10-based)."""
    pts = corollary_points(1, cfg)
    assert len(pts) == 2
    s10 = math.sqrt(10.0)
    r1 = half_log2(1 + (s10 + 0.55 * s10 + 0.55 * s10) ** 2)
    r2 = half_log2(1 + 10 / (1 + 0.55**2 * 10))
    r3 = half_log2(1 + 10)
    assert pts[0].point.as_tuple() == pytest.approx((r1, 0, 0), abs=1e-12)
    assert pts[1].point.as_tuple() == pytest.approx((0, r2, r3), abs=1e-12)
    assert r1 == pytest.approx(2.74753, abs=1e-4)
    assert r2 == pytest.approx(0.90047, abs=1e-4)
    assert r3 == pytest.approx(1.72972, abs=1e-4)


def test_family_4_and_5_values(cfg):
    pts4 = corollary_points(4, cfg)
    s10 = math.sqrt(10.0)
    assert pts4[0].point.r2 == pytest.approx(
        half_log2(1 + (s10 + 0.55 * s10) ** 2), abs=1e-12)
    assert pts4[0].point.r2 == pytest.approx(2.32265, abs=1e-4)
    assert pts4[1].point.r3 == pytest.approx(1.72972, abs=1e-4)
    pts5 = corollary_points(5, cfg)
    pts1 = corollary_points(1, cfg)
    # symmetric channel: sender 3's capped rate mirrors sender 2's
    assert pts5[1].point.r3 == pytest.approx(pts1[1].point.r2, abs=1e-15)


def test_family_counts_and_schemes(cfg):
    sizes = {1: 2, 4: 2, 5: 2, 8: 3}
    for cid, n in sizes.items():
        assert len(corollary_points(cid, cfg)) == n
    for cid in (2, 6):
        assert len(corollary_points(cid, cfg, grid=11)) == 22
    assert len(corollary_points(9, cfg, grid=11)) == 33
    assert scheme_for_corollary(3) is Scheme.CUMS2
    assert scheme_for_corollary(7) is Scheme.PRMS2
    assert scheme_for_corollary(9) is Scheme.COMS
    with pytest.raises(ConfigError):
        scheme_for_corollary(10)


def test_family_1_zero_power_collapses_to_origin():
    cfg0 = ChannelConfig(p1=0, p2=0, p3=0)
    for cp in corollary_points(1, cfg0):
        assert cp.point.as_tuple() == (0, 0, 0)


def test_interference_free_rate_is_exact(cfg):
    pts = corollary_points(1, cfg)
    assert pts[1].point.r3 == 0.5 * math.log2(1 + cfg.p3 / cfg.q3)


def test_sweep_validation_reports_maximum(cfg):
    with pytest.raises(ConfigError, match="10"):
        corollary_points(2, cfg, sweep=[cfg.p3 + 1.0])
    rmax = r2_max_interference_limited(cfg)
    with pytest.raises(ConfigError, match="0.9"):
        corollary_points(3, cfg, sweep=[rmax + 0.5])
    with pytest.raises(ConfigError, match="takes no sweep"):
        corollary_points(1, cfg, sweep=[0.5])


def test_sweep_continuity(cfg):
    for cid in (2, 3, 6, 7, 9):
        pts = corollary_points(cid, cfg, grid=101)
        per_sweep = {}
        for cp in pts:
            per_sweep.setdefault(cp.sweep_value, []).append(cp.point.as_tuple())
        values = sorted(per_sweep)
        for lo, hi in zip(values, values[1:]):
            for a, b in zip(per_sweep[lo], per_sweep[hi]):
                # grid steps of 1/100 of the interval move rates by far
                # less than the worst-case slope of the formulas
                assert max(abs(x - y) for x, y in zip(a, b)) < 0.15


def test_endpoints_touch_their_outer_caps(cfg):
    outer = outer_region(Scheme.CUMS2, cfg, resolution=61)
    pts = corollary_points(2, cfg, sweep=[0.0, cfg.p3])
    arr = points_array(pts)
    assert outer.contains(arr, tol=1e-3).all()
    cap = {c.name: c.bound for c in outer.caps}
    touched = []
    for p in arr:
        touched.append(
            abs(p[0] - cap["r1"]) <= 1e-3
            or abs(p[1] - cap["r2"]) <= 1e-3
            or abs(p[2] - cap["r3"]) <= 1e-3
        )
    assert all(touched)


def test_all_families_inside_matching_outer_region(cfg):
    outers = {}
    for cid in ALL_IDS:
        scheme = scheme_for_corollary(cid)
        if scheme not in outers:
            outers[scheme] = outer_region(scheme, cfg, resolution=61)
        pts = points_array(corollary_points(cid, cfg, grid=21))
        assert outers[scheme].contains(pts, tol=1e-6).all(), f"family {cid}"


@pytest.fixture(scope="module")
def cloud(cfg):
    return compute_region(cfg, SamplingSpec(n=500, seed=1, scheme=Scheme.CUMS2))


def test_time_share_hull_merges_exterior_point(cfg, cloud):
    assert cloud.diagnostics["vertices"] > 0
    merged = time_share_hull(cloud, corollary_points(1, cfg))
    r1_star = corollary_points(1, cfg)[0].point.r1
    assert merged.max_along("r1") == pytest.approx(r1_star, abs=1e-12)
    verts = {tuple(np.round(v, 9)) for v in merged.hull.vertices}
    assert tuple(np.round([r1_star, 0, 0], 9)) in verts


def test_time_share_hull_interior_points_change_nothing(cfg, cloud):
    base = time_share_hull(cloud, [])
    tiny = corollary_points(1, ChannelConfig(p1=1e-6, p2=1e-6, p3=1e-6))
    merged = time_share_hull(cloud, tiny)
    assert base.hull.contains(merged.hull.vertices, tol=1e-7).all()
    assert merged.hull.contains(base.hull.vertices, tol=1e-7).all()
