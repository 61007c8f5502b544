"""Achievable-region sampling driver.

Draws binning parameterizations, evaluates each scheme's constraint
system, enumerates the feasible split-rate polytopes, and accumulates the
projected user-rate vertices into a region cloud.  The union over draws is
order independent, so samples are sub-seeded by index and evaluated in
fixed-size chunks; thread count changes dispatch only, never arithmetic.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .constraints import BatchEvaluator
from .gaussinfo import assemble_covariance_batch
from .model import ChannelConfig, ConfigError, GpParams, Scheme
from .polytope import (
    VertexEnumerator,
    axis_number,
    convex_hull_2d,
    dedup_points,
    downward_closure_2d,
)

CHUNK = 256  # fixed so chunking never depends on thread count

_PARAM_FIELDS = ("tau", "kappa", "alpha1", "alpha2", "alpha3", "alpha4",
                 "beta1", "beta2")

SOURCE_SAMPLE = 0
SOURCE_ORIGIN = 1
SOURCE_COROLLARY = 2


@dataclass(frozen=True)
class SamplingSpec:
    """How many parameter draws to take and how to derive them."""

    n: int
    seed: int
    scheme: Scheme
    overrides: Mapping[str, float] | None = None
    smart: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"sample count must be >= 1, got {self.n}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.overrides:
            unknown = sorted(set(self.overrides) - set(_PARAM_FIELDS))
            if unknown:
                raise ConfigError(f"unknown parameter overrides: {unknown}")


def sample_params(spec: SamplingSpec, i: int) -> GpParams:
    """Parameter draw for sample ``i``: fractions uniform on [0, 1],
    coefficients standard normal, all derived from (seed, i) alone."""
    if not 0 <= i < spec.n:
        raise ConfigError(f"sample index {i} outside [0, {spec.n})")
    rng = np.random.default_rng([spec.seed, i])
    tau, kappa = rng.uniform(size=2)
    a1, a2, a3, a4 = rng.standard_normal(4)
    b1, b2 = rng.standard_normal(2)
    params = GpParams(tau, kappa, a1, a2, a3, a4, b1, b2)
    if spec.overrides:
        params = params.replace(**dict(spec.overrides))
    return params


def costa_params(cfg: ChannelConfig, scheme: Scheme, base: GpParams) -> GpParams:
    """Replace the drawn coefficients with interference-cancellation
    analogs: each auxiliary scales its known-signal coefficient by
    own-power / (own-power + what its receiver treats as noise)."""
    g = cfg.gains
    t, k = base.tau, base.kappa
    if scheme in (Scheme.CUMS2, Scheme.PRMS2):
        n2_u1 = (1 - t) * cfg.p2 + g.a23 ** 2 * cfg.p3 + cfg.q2
        n2_u2 = t * cfg.p2 + g.a23 ** 2 * cfg.p3 + cfg.q2
        n3_v1 = (1 - k) * cfg.p3 + cfg.q3
        n3_v3 = k * cfg.p3 + cfg.q3
        return base.replace(
            alpha1=g.a21 * t * cfg.p2 / (t * cfg.p2 + n2_u1),
            alpha2=g.a21 * (1 - t) * cfg.p2 / ((1 - t) * cfg.p2 + n2_u2),
            alpha3=g.a31 * k * cfg.p3 / (k * cfg.p3 + n3_v1),
            alpha4=g.a31 * (1 - k) * cfg.p3 / ((1 - k) * cfg.p3 + n3_v3),
            beta1=g.a32 * k * cfg.p3 / (k * cfg.p3 + n3_v1),
            beta2=g.a32 * (1 - k) * cfg.p3 / ((1 - k) * cfg.p3 + n3_v3),
        )
    n3_v0 = (1 - k) * cfg.p3 + cfg.q3
    n3_v3 = k * cfg.p3 + cfg.q3
    return base.replace(
        alpha3=g.a31 * k * cfg.p3 / (k * cfg.p3 + n3_v0),
        alpha4=g.a31 * (1 - k) * cfg.p3 / ((1 - k) * cfg.p3 + n3_v3),
        beta1=g.a32 * k * cfg.p3 / (k * cfg.p3 + n3_v0),
        beta2=g.a32 * (1 - k) * cfg.p3 / ((1 - k) * cfg.p3 + n3_v3),
    )


def _resolved_params(cfg: ChannelConfig, spec: SamplingSpec, i: int) -> GpParams:
    params = sample_params(spec, i)
    if spec.smart and i % 2 == 1:
        params = costa_params(cfg, spec.scheme, params)
        if spec.overrides:
            params = params.replace(**dict(spec.overrides))
    return params


@dataclass
class RegionCloud:
    """Accumulated achievable rate points with provenance.

    ``source`` is 0 for sampled polytope vertices, 1 for the always
    achievable origin, 2 for merged closed-form points; ``ref`` carries the
    sample index or closed-form family id.  ``sample_rhs`` keeps the
    numeric right-hand sides of every feasible sample so slices can be
    recomputed on the original systems instead of the stored points.
    """

    scheme: Scheme
    points: np.ndarray
    source: np.ndarray
    ref: np.ndarray
    sample_rhs: np.ndarray
    sample_idx: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def max_along(self, axis) -> float:
        ax = axis_number(axis)
        return float(self.points[:, ax].max()) if len(self.points) else 0.0

    def view_points(self, mapping: np.ndarray) -> np.ndarray:
        return self.points @ np.asarray(mapping, dtype=float).T

    def hull_view(self, mapping: np.ndarray) -> np.ndarray:
        """CCW hull polygon of the cloud under a 2 x 3 linear map."""
        return convex_hull_2d(self.view_points(mapping))

    def with_extra_points(self, pts: np.ndarray, ref_id: int) -> "RegionCloud":
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return RegionCloud(
            scheme=self.scheme,
            points=np.vstack([self.points, pts]),
            source=np.concatenate([self.source,
                                   np.full(len(pts), SOURCE_COROLLARY, np.int8)]),
            ref=np.concatenate([self.ref, np.full(len(pts), ref_id, np.int64)]),
            sample_rhs=self.sample_rhs,
            sample_idx=self.sample_idx,
            diagnostics=dict(self.diagnostics),
        )


_EVALUATORS: dict[Scheme, BatchEvaluator] = {}
_ENUMERATORS: dict = {}


def _evaluator(scheme: Scheme) -> BatchEvaluator:
    if scheme not in _EVALUATORS:
        _EVALUATORS[scheme] = BatchEvaluator(scheme)
    return _EVALUATORS[scheme]


def _enumerator(scheme: Scheme, slice_axis: int | None = None) -> VertexEnumerator:
    key = (scheme, slice_axis)
    if key not in _ENUMERATORS:
        a = _evaluator(scheme).a_matrix
        if slice_axis is not None:
            row = -scheme.projection_matrix()[slice_axis]
            a = np.vstack([a, row])
        _ENUMERATORS[key] = VertexEnumerator(a)
    return _ENUMERATORS[key]


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("COGRATES_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"COGRATES_THREADS must be an integer, got {env!r}")


def compute_region(
    cfg: ChannelConfig, spec: SamplingSpec, threads: int | None = None
) -> RegionCloud:
    """Union of projected rate polytopes over all parameter draws.

    Per draw: assemble the covariance, evaluate the constraint system,
    and, when feasible, enumerate the split-rate vertices and project them
    to user rates.  Infeasible draws (negative single-rate bounds or
    degenerate parameterizations) are counted and discarded; the origin is
    always included.
    """
    scheme = spec.scheme
    if not scheme.gaussian_capable:
        raise ConfigError(
            f"scheme {scheme.value} has no Gaussian parameterization; "
            "regions are available for cums2, prms2 and coms"
        )
    evaluator = _evaluator(scheme)
    venum = _enumerator(scheme)
    proj = scheme.projection_matrix()

    def run_chunk(lo: int):
        hi = min(lo + CHUNK, spec.n)
        params = [_resolved_params(cfg, spec, i) for i in range(lo, hi)]
        tables = assemble_covariance_batch(cfg, params, scheme)
        rhs, feas = evaluator.evaluate(tables)
        out = []
        for j, i in enumerate(range(lo, hi)):
            if feas[j]:
                verts = venum.solve(rhs[j])
                pts = (
                    dedup_points(verts @ proj.T)
                    if verts.size
                    else np.zeros((0, 3))
                )
                out.append((i, rhs[j], pts))
        return out

    starts = list(range(0, spec.n, CHUNK))
    n_threads = _resolve_threads(threads)
    if n_threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            chunk_results = list(pool.map(run_chunk, starts))
    else:
        chunk_results = [run_chunk(lo) for lo in starts]

    rows = [np.zeros((1, 3))]
    source = [np.array([SOURCE_ORIGIN], np.int8)]
    ref = [np.array([-1], np.int64)]
    rhs_rows = []
    idx_rows = []
    vertex_total = 0
    max_vertices = 0
    for chunk in chunk_results:
        for i, rhs, pts in chunk:
            rhs_rows.append(rhs)
            idx_rows.append(i)
            if len(pts):
                rows.append(pts)
                source.append(np.full(len(pts), SOURCE_SAMPLE, np.int8))
                ref.append(np.full(len(pts), i, np.int64))
                vertex_total += len(pts)
                max_vertices = max(max_vertices, len(pts))

    n_feasible = len(idx_rows)
    m = evaluator.a_matrix.shape[0]
    return RegionCloud(
        scheme=scheme,
        points=np.vstack(rows),
        source=np.concatenate(source),
        ref=np.concatenate(ref),
        sample_rhs=np.array(rhs_rows) if rhs_rows else np.zeros((0, m)),
        sample_idx=np.array(idx_rows, dtype=np.int64),
        diagnostics={
            "samples": spec.n,
            "seed": spec.seed,
            "feasible": n_feasible,
            "infeasible": spec.n - n_feasible,
            "feasible_fraction": n_feasible / spec.n,
            "vertices": vertex_total,
            "max_vertices_per_sample": max_vertices,
        },
    )


def region_slice(
    cloud: RegionCloud, axis, c: float, extra_points: np.ndarray | None = None
) -> np.ndarray:
    """2D hull of the region restricted to {rate_axis >= c}.

    Every feasible sample's split-rate system is re-sliced (the stored
    point cloud alone would under-cover the slice), the per-sample slices
    are unioned, and the union is hulled.  ``extra_points`` admits merged
    closed-form rate points; those at or above the slice level enter with
    their in-plane shadows since dominated points are achievable.
    """
    c = float(c)
    if c < 0:
        raise ConfigError(f"slice value must be >= 0, got {c}")
    ax = axis_number(axis)
    keep = [i for i in range(3) if i != ax]
    scheme = cloud.scheme
    proj = scheme.projection_matrix()
    venum = _enumerator(scheme, slice_axis=ax)

    collected = []
    for rhs in cloud.sample_rhs:
        b = np.concatenate([rhs, [-c]])
        verts = venum.solve(b)
        if verts.size:
            collected.append((verts @ proj.T)[:, keep])
    if extra_points is not None and len(extra_points):
        extra = np.atleast_2d(np.asarray(extra_points, dtype=float))
        sel = extra[extra[:, ax] >= c - 1e-12]
        if len(sel):
            collected.append(downward_closure_2d(sel[:, keep]))
    if c == 0.0:
        collected.append(np.zeros((1, 2)))
    if not collected:
        return np.zeros((0, 2))
    return convex_hull_2d(np.vstack(collected))
