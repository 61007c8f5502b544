"""Outer bounds: dual multiple-access union, per-user caps, water-filling.

Full bidirectional cooperation turns the three-sender channel into a
three-antenna broadcast channel whose capacity region is the union of dual
multiple-access regions over transmit power splits.  That region,
intersected with per-user caps reflecting what each sharing pattern can
actually forward and with a full-cooperation pairwise sum cap, is the
outer bound the achievable clouds are compared against.

Conventions: rates carry the real-signal 1/2 log2 prefactor and the dual
MAC is normalized by a common noise variance (a config knob defaulting to
receiver 1's), so inner and outer regions are commensurable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import ChannelConfig, ConfigError, Scheme
from .polytope import (
    Hull3D,
    axis_number,
    convex_hull_2d,
    dedup_points,
    downward_closure_3d,
)

LN2 = math.log(2.0)

DEFAULT_RESOLUTION = 101


@dataclass(frozen=True)
class PowerSplit:
    """One point of the broadcast power simplex."""

    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        for name in ("p1", "p2", "p3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"split power {name} must be >= 0, got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])


def channel_rows(cfg: ChannelConfig) -> np.ndarray:
    """Per-receiver gain rows of the standard-form channel."""
    g = cfg.gains
    return np.array([
        [1.0, g.a12, g.a13],
        [g.a21, 1.0, g.a23],
        [g.a31, g.a32, 1.0],
    ])


def mac_rate_vector(rows: np.ndarray, split, order, noise: float) -> np.ndarray:
    """Successive-decoding rates of the dual MAC for one decode order.

    The user decoded at step j is detected in the presence of all
    not-yet-decoded users; its rate is the log-determinant ratio of the
    received Gram matrices with and without it.
    """
    rows = np.asarray(rows, dtype=float)
    split = split.as_array() if isinstance(split, PowerSplit) else np.asarray(
        split, dtype=float)
    if np.any(split < 0):
        raise ConfigError(f"negative power in split {split}")
    if sorted(order) != [0, 1, 2]:
        raise ConfigError(f"order must be a permutation of (0, 1, 2), got {order}")
    if noise <= 0:
        raise ConfigError(f"noise must be positive, got {noise}")

    def logdet_gram(users) -> float:
        g = np.eye(3)
        for i in users:
            g += (split[i] / noise) * np.outer(rows[i], rows[i])
        return float(np.linalg.slogdet(g)[1])

    rates = np.zeros(3)
    for pos, user in enumerate(order):
        with_user = logdet_gram(order[pos:])
        without = logdet_gram(order[pos + 1:])
        rates[user] = 0.5 * (with_user - without) / LN2
    return rates


_ORDERS = tuple(itertools.permutations(range(3)))


def mac_corner_points(rows: np.ndarray, split, noise: float) -> np.ndarray:
    """The six successive-decoding corner points for one power split."""
    return np.array([mac_rate_vector(rows, split, order, noise)
                     for order in _ORDERS])


def simplex_grid(total: float, resolution: int) -> np.ndarray:
    """All nonnegative splits of ``total`` on a grid with ``resolution``
    points per simplex edge."""
    if resolution < 2:
        raise ConfigError(f"resolution must be >= 2, got {resolution}")
    n = resolution - 1
    out = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            k = n - i - j
            out.append((i, j, k))
    return np.asarray(out, dtype=float) * (total / n)


def bc_outer_cloud(cfg: ChannelConfig, resolution: int = DEFAULT_RESOLUTION
                   ) -> np.ndarray:
    """Corner points of every dual-MAC region over the power-split grid;
    the hull of this cloud approximates the broadcast capacity region."""
    rows = channel_rows(cfg)
    total = cfg.p1 + cfg.p2 + cfg.p3
    noise = cfg.effective_mac_noise
    pts = [mac_corner_points(rows, split, noise)
           for split in simplex_grid(total, resolution)]
    return np.vstack(pts)


def waterfill(sigmas, power: float, noise: float) -> tuple[np.ndarray, float]:
    """Power allocation over parallel modes with gains sigma^2 / noise.

    Returns the per-mode powers (aligned with the input order) and the
    common water level; modes too weak to reach the level get zero.
    """
    sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
    if power < 0:
        raise ConfigError(f"power must be >= 0, got {power}")
    if noise <= 0:
        raise ConfigError(f"noise must be positive, got {noise}")
    gains = sigmas**2 / noise
    powers = np.zeros_like(gains)
    usable = gains > 0
    if power == 0 or not np.any(usable):
        return powers, 0.0
    inv = 1.0 / gains[usable]
    order = np.argsort(inv)  # strongest mode first
    inv_sorted = inv[order]
    level = 0.0
    for k in range(inv_sorted.size, 0, -1):
        level = (power + inv_sorted[:k].sum()) / k
        if level >= inv_sorted[k - 1]:
            break
    alloc = np.maximum(level - inv_sorted, 0.0)
    filled = np.zeros_like(inv)
    filled[order] = alloc
    powers[usable] = filled
    return powers, float(level)


def mimo_p2p_capacity(h_matrix, power: float, noise: float) -> float:
    """Water-filled capacity of a cooperative point-to-point channel."""
    h = np.atleast_2d(np.asarray(h_matrix, dtype=float))
    sigmas = np.linalg.svd(h, compute_uv=False)
    powers, _ = waterfill(sigmas, power, noise)
    snr = powers * sigmas**2 / noise
    return float(np.sum(0.5 * np.log2(1.0 + snr)))


@dataclass(frozen=True)
class Cap:
    """One linear cap coeffs . (r1, r2, r3) <= bound."""

    name: str
    coeffs: tuple[float, float, float]
    bound: float


def _cap_r1_full_help(cfg: ChannelConfig) -> float:
    g = cfg.gains
    amp = math.sqrt(cfg.p1) + abs(g.a12) * math.sqrt(cfg.p2) + abs(
        g.a13) * math.sqrt(cfg.p3)
    return 0.5 * math.log2(1.0 + amp**2 / cfg.q1)


def _cap_r2_helped(cfg: ChannelConfig) -> float:
    g = cfg.gains
    amp = math.sqrt(cfg.p2) + abs(g.a23) * math.sqrt(cfg.p3)
    return 0.5 * math.log2(1.0 + amp**2 / cfg.q2)


def _cap_r3_interference_free(cfg: ChannelConfig) -> float:
    return 0.5 * math.log2(1.0 + cfg.p3 / cfg.q3)


def _cap_r2_interference_free(cfg: ChannelConfig) -> float:
    return 0.5 * math.log2(1.0 + cfg.p2 / cfg.q2)


def _cap_r1_coms(cfg: ChannelConfig) -> float:
    g = cfg.gains
    amp = math.sqrt(cfg.p1) + abs(g.a13) * math.sqrt(cfg.p3)
    return 0.5 * math.log2(1.0 + amp**2 / cfg.q1)


def cooperative_pair(scheme: Scheme, cfg: ChannelConfig):
    """Cooperating sender pair, its 2 x 2 channel matrix, and total power.

    The senders that share messages pool their antennas with the pairing
    receivers; the matrix keeps those receivers' rows restricted to the
    cooperating senders, the minimal reading of full pairwise cooperation.
    """
    g = cfg.gains
    if scheme in (Scheme.CUMS2, Scheme.CUMS1, Scheme.PRMS2, Scheme.PRMS1):
        matrix = np.array([[1.0, g.a23], [g.a32, 1.0]])
        return ("r2+r3", (0.0, 1.0, 1.0), matrix, cfg.p2 + cfg.p3)
    if scheme is Scheme.COMS:
        matrix = np.array([[1.0, g.a12], [g.a21, 1.0]])
        return ("r1+r2", (1.0, 1.0, 0.0), matrix, cfg.p1 + cfg.p2)
    raise ConfigError(f"unsupported scheme {scheme!r}")


def individual_caps(scheme: Scheme, cfg: ChannelConfig) -> list[Cap]:
    """Per-user caps plus the full-cooperation pairwise sum-rate cap."""
    if scheme in (Scheme.CUMS2, Scheme.CUMS1):
        caps = [
            Cap("r1", (1.0, 0.0, 0.0), _cap_r1_full_help(cfg)),
            Cap("r2", (0.0, 1.0, 0.0), _cap_r2_helped(cfg)),
            Cap("r3", (0.0, 0.0, 1.0), _cap_r3_interference_free(cfg)),
        ]
    elif scheme in (Scheme.PRMS2, Scheme.PRMS1):
        caps = [
            Cap("r1", (1.0, 0.0, 0.0), _cap_r1_full_help(cfg)),
            Cap("r2", (0.0, 1.0, 0.0), _cap_r2_interference_free(cfg)),
            Cap("r3", (0.0, 0.0, 1.0), _cap_r3_interference_free(cfg)),
        ]
    elif scheme is Scheme.COMS:
        caps = [
            Cap("r1", (1.0, 0.0, 0.0), _cap_r1_coms(cfg)),
            Cap("r2", (0.0, 1.0, 0.0), _cap_r2_helped(cfg)),
            Cap("r3", (0.0, 0.0, 1.0), _cap_r3_interference_free(cfg)),
        ]
    else:
        raise ConfigError(f"unsupported scheme {scheme!r}")
    name, coeffs, matrix, power = cooperative_pair(scheme, cfg)
    caps.append(
        Cap(name, coeffs, mimo_p2p_capacity(matrix, power,
                                            cfg.effective_mac_noise))
    )
    return caps


@dataclass
class OuterRegion:
    """Intersection of the broadcast-duality hull with the rate caps.

    ``points`` is the cap-respecting part of the generating cloud (kept
    for scatter output); the geometry lives in ``hull`` which has been
    clipped exactly against every cap and closed downward, so containment
    checks and slices are hull operations.
    """

    scheme: Scheme
    caps: list[Cap]
    hull: Hull3D
    points: np.ndarray
    resolution: int

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        return self.hull.contains(points, tol=tol)

    def max_along(self, axis) -> float:
        ax = axis_number(axis)
        direction = np.zeros(3)
        direction[ax] = 1.0
        return self.hull.max_along(direction)

    def view_polygon(self, mapping: np.ndarray) -> np.ndarray:
        pts = self.hull.view(mapping)
        if pts.size == 0:
            return np.zeros((0, 2))
        return convex_hull_2d(pts)

    def slice_polygon(self, axis, c: float) -> np.ndarray:
        restricted = self.hull.restrict_min(axis, c)
        if restricted.is_empty:
            return np.zeros((0, 2))
        pts = dedup_points(restricted.project_drop(axis))
        return convex_hull_2d(pts)


def outer_region(
    scheme: Scheme, cfg: ChannelConfig, resolution: int = DEFAULT_RESOLUTION
) -> OuterRegion:
    """Build the outer bound for a scheme at the given simplex resolution."""
    cloud = bc_outer_cloud(cfg, resolution)
    caps = individual_caps(scheme, cfg)

    hull = Hull3D(cloud)
    hull = Hull3D(downward_closure_3d(hull.vertices))
    for cap in caps:
        hull = hull.clip(np.asarray(cap.coeffs), cap.bound)

    cap_matrix = np.array([cap.coeffs for cap in caps])
    cap_bounds = np.array([cap.bound for cap in caps])
    ok = np.all(cloud @ cap_matrix.T <= cap_bounds + 1e-9, axis=1)
    return OuterRegion(
        scheme=scheme,
        caps=caps,
        hull=hull,
        points=cloud[ok],
        resolution=resolution,
    )
