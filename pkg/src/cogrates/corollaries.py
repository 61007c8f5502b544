"""Closed-form achievable rate points and time-sharing hulls.

Cognitive senders can spend part or all of their power relaying another
sender's message; each family below pins down the rate tuples that trade
makes achievable, either as fixed points or swept along a helper-power
split.  Convex hulls with the sampled region are achievable by time
sharing.  Formulas are transcribed exactly; one coefficient kept as
printed is flagged where it is suspected of being a typo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .achievable import RegionCloud, region_slice
from .model import ChannelConfig, ConfigError, RatePoint, Scheme
from .polytope import Hull3D, convex_hull_2d, downward_closure_3d

DEFAULT_GRID = 101

SWEPT_IDS = (2, 3, 6, 7, 9)
ALL_IDS = tuple(range(1, 10))

_SCHEME_FOR_ID = {
    1: Scheme.CUMS2, 2: Scheme.CUMS2, 3: Scheme.CUMS2, 4: Scheme.CUMS2,
    5: Scheme.PRMS2, 6: Scheme.PRMS2, 7: Scheme.PRMS2,
    8: Scheme.COMS, 9: Scheme.COMS,
}


@dataclass(frozen=True)
class CorollaryPoint:
    corollary_id: int
    sweep_value: float | None
    point: RatePoint


def scheme_for_corollary(cid: int) -> Scheme:
    if cid not in _SCHEME_FOR_ID:
        raise ConfigError(f"corollary id must be in 1..9, got {cid}")
    return _SCHEME_FOR_ID[cid]


def _half_log2(x: float) -> float:
    return 0.5 * math.log2(x)


def _snr_rate(amplitude: float, noise: float) -> float:
    return _half_log2(1.0 + amplitude**2 / noise)


def r2_max_interference_limited(cfg: ChannelConfig) -> float:
    """Largest rate sender 2 sustains while treating sender 3's full
    signal as noise; the feasible upper end of the swept family 3."""
    g = cfg.gains
    return _half_log2(1.0 + cfg.p2 / (cfg.q2 + g.a23**2 * cfg.p3))


def _sweep_values(cid: int, cfg: ChannelConfig, sweep, grid: int) -> np.ndarray:
    if cid in (2, 6, 9):
        hi, what = cfg.p3, "helper power"
    elif cid == 7:
        hi, what = cfg.p2, "helper power"
    elif cid == 3:
        hi, what = r2_max_interference_limited(cfg), "guaranteed rate"
    else:
        raise ConfigError(f"corollary {cid} takes no sweep")
    if sweep is None:
        return np.linspace(0.0, hi, grid)
    values = np.atleast_1d(np.asarray(sweep, dtype=float))
    if np.any(values < -1e-12) or np.any(values > hi + 1e-12):
        raise ConfigError(
            f"corollary {cid} {what} values must lie in [0, {hi:.6g}]"
        )
    return np.clip(values, 0.0, hi)


def corollary_points(
    cid: int, cfg: ChannelConfig, sweep=None, grid: int = DEFAULT_GRID
) -> list[CorollaryPoint]:
    """Rate points of one closed-form family.

    Swept families emit one point group per grid value of the swept
    parameter (helper power for 2, 6, 7, 9; the guaranteed rate for 3);
    values outside the feasible interval are rejected with the computed
    maximum.
    """
    scheme_for_corollary(cid)
    if sweep is not None and cid not in SWEPT_IDS:
        raise ConfigError(f"corollary {cid} takes no sweep")
    g = cfg.gains
    p1, p2, p3 = cfg.p1, cfg.p2, cfg.p3
    q1, q2, q3 = cfg.q1, cfg.q2, cfg.q3
    s1, s2, s3 = math.sqrt(p1), math.sqrt(p2), math.sqrt(p3)
    out: list[CorollaryPoint] = []

    def emit(sweep_value, *rates):
        for r in rates:
            out.append(CorollaryPoint(cid, sweep_value, RatePoint(*r)))

    if cid == 1:
        r1 = _snr_rate(s1 + abs(g.a12) * s2 + abs(g.a13) * s3, q1)
        r2 = _half_log2(1.0 + p2 / (q2 + g.a23**2 * p3))
        r3 = _half_log2(1.0 + p3 / q3)
        emit(None, (r1, 0, 0), (0, r2, r3))
    elif cid == 2:
        for p3s3 in _sweep_values(cid, cfg, sweep, grid):
            helper = p3 - p3s3  # both helping roles get the full residual
            r1 = _snr_rate(
                s1 + abs(g.a12) * s2 + abs(g.a13) * math.sqrt(helper),
                q1 + g.a13**2 * p3s3,
            )
            r2 = _snr_rate(
                s2 + abs(g.a23) * math.sqrt(helper), q2 + g.a23**2 * p3s3
            )
            r = _half_log2(1.0 + p3s3 / q3)
            emit(float(p3s3), (r1, 0, r), (0, r2, r))
    elif cid == 3:
        base = q2 + g.a23**2 * p3
        for r in _sweep_values(cid, cfg, sweep, grid):
            p2s2 = min((2.0 ** (2.0 * r) - 1.0) * base, p2)
            p2s1 = p2 - p2s2
            r1 = _snr_rate(
                s1 + abs(g.a12) * math.sqrt(p2s1) + abs(g.a13) * s3,
                q1 + g.a12**2 * p2s2,
            )
            r3 = _half_log2(1.0 + p3 / q3)
            emit(float(r), (r1, r, 0), (0, r, r3))
    elif cid == 4:
        r2 = _snr_rate(s2 + abs(g.a23) * s3, q2)
        r3 = _half_log2(1.0 + p3 / q3)
        emit(None, (0, r2, 0), (0, 0, r3))
    elif cid == 5:
        r1 = _snr_rate(s1 + abs(g.a12) * s2 + abs(g.a13) * s3, q1)
        r2 = _half_log2(1.0 + p2 / (q2 + g.a23**2 * p3))
        r3 = _half_log2(1.0 + p3 / (q3 + g.a32**2 * p2))
        emit(None, (r1, 0, 0), (0, r2, r3))
    elif cid == 6:
        for p3s3 in _sweep_values(cid, cfg, sweep, grid):
            helper = p3 - p3s3
            r1 = _snr_rate(
                s1 + abs(g.a12) * s2 + abs(g.a13) * math.sqrt(helper),
                q1 + g.a13**2 * p3s3,
            )
            r2 = _half_log2(1.0 + p2 / (q2 + g.a23**2 * p3))
            r = _half_log2(1.0 + p3s3 / (q3 + g.a32**2 * p2))
            emit(float(p3s3), (r1, 0, r), (0, r2, r))
    elif cid == 7:
        for p2s2 in _sweep_values(cid, cfg, sweep, grid):
            p2s1 = p2 - p2s2
            r1 = _snr_rate(
                s1 + abs(g.a12) * math.sqrt(p2s1) + abs(g.a13) * s3,
                q1 + g.a12**2 * p2s2,
            )
            r = _half_log2(1.0 + p2s2 / (q2 + g.a23**2 * p3))
            r3 = _half_log2(1.0 + p3 / (q3 + g.a32**2 * p2))
            emit(float(p2s2), (r1, r, 0), (0, r, r3))
    elif cid == 8:
        r1 = _snr_rate(s1 + abs(g.a13) * s3, q1 + g.a12**2 * p2)
        r2 = _snr_rate(s2 + abs(g.a23) * s3, q2 + g.a21**2 * p1)
        r3 = _half_log2(1.0 + p3 / q3)
        emit(None, (r1, 0, 0), (0, r2, 0), (0, 0, r3))
    elif cid == 9:
        for p3s3 in _sweep_values(cid, cfg, sweep, grid):
            helper = p3 - p3s3
            r1 = _snr_rate(
                s1 + abs(g.a13) * math.sqrt(helper),
                q1 + g.a12**2 * p2 + g.a13**2 * p3s3,
            )
            # a13 kept as transcribed for the second sender's coefficient;
            # a23 was likely intended but the two agree at symmetric gains
            r2 = _snr_rate(
                s2 + abs(g.a13) * math.sqrt(helper),
                q2 + g.a21**2 * p1 + g.a13**2 * p3s3,
            )
            r = _half_log2(1.0 + p3s3 / q3)
            emit(float(p3s3), (r1, 0, r), (0, r2, r), (0, 0, r))
    return out


def points_array(points: list[CorollaryPoint]) -> np.ndarray:
    if not points:
        return np.zeros((0, 3))
    return np.array([cp.point.as_tuple() for cp in points])


@dataclass
class MergedRegion:
    """Sampled region merged with closed-form points under time sharing."""

    cloud: RegionCloud
    extra: np.ndarray
    hull: Hull3D

    def view_polygon(self, mapping: np.ndarray) -> np.ndarray:
        pts = self.hull.view(np.asarray(mapping, dtype=float))
        if pts.size == 0:
            return np.zeros((0, 2))
        return convex_hull_2d(pts)

    def slice_polygon(self, axis, c: float) -> np.ndarray:
        return region_slice(self.cloud, axis, c, extra_points=self.extra)

    def max_along(self, axis) -> float:
        direction = np.zeros(3)
        from .polytope import axis_number

        direction[axis_number(axis)] = 1.0
        return self.hull.max_along(direction)


def time_share_hull(
    cloud: RegionCloud, points: list[CorollaryPoint]
) -> MergedRegion:
    """Convex hull of the sampled cloud and closed-form points.

    Dominated versions of the closed-form points are achievable, so their
    orthant shadows enter the hull as well; slices are recomputed on the
    merged set rather than read off the stored cloud.
    """
    extra = points_array(points)
    merged = (
        np.vstack([cloud.points, downward_closure_3d(extra)])
        if len(extra)
        else cloud.points
    )
    return MergedRegion(cloud=cloud, extra=extra, hull=Hull3D(merged))
