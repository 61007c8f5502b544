"""Cross-module consistency suite behind the ``verify`` command.

Each check exercises a different pair of independent computation routes;
together they cover the analytic information path against Monte Carlo,
the geometry kernel against grid scans, the power allocation against its
optimality conditions, and the achievable clouds against the outer
bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .achievable import SamplingSpec, compute_region
from .constraints import build_system
from .corollaries import ALL_IDS, corollary_points, points_array, scheme_for_corollary
from .discrete import (
    check_factorization,
    gaussian_mi_mc,
    mi_discrete,
    random_scheme_pmf,
    scheme_factorization,
)
from .gaussinfo import CovarianceTable, assemble_covariance, conditional_mi
from .model import ChannelConfig, GpParams, Scheme, validate_config
from .outerbound import (
    channel_rows,
    mac_rate_vector,
    outer_region,
    waterfill,
)
from .polytope import HalfspaceSystem, enumerate_vertices, convex_hull_2d, point_in_polygon_ccw


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_table(rng, k: int = 5) -> CovarianceTable:
    load = rng.standard_normal((k, k + 2))
    m = load @ load.T + 1e-6 * np.eye(k)
    labels = tuple(f"X{i}" for i in range(k))
    return CovarianceTable(labels=labels, matrix=m)


def check_mi_chain_rule(seed: int = 0, trials: int = 40) -> CheckResult:
    """I(AB;C|D) = I(A;C|D) + I(B;C|AD) on random covariance tables."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        t = _random_table(rng)
        a, b, c, d = ("X0",), ("X1",), ("X2", "X3"), ("X4",)
        lhs = conditional_mi(t, a + b, c, d)
        rhs = conditional_mi(t, a, c, d) + conditional_mi(t, b, c, a + d)
        worst = max(worst, abs(lhs - rhs))
        if conditional_mi(t, a, c, d) < -1e-9:
            return CheckResult("info-chain-rule", False, "negative information")
    return CheckResult("info-chain-rule", worst <= 1e-9,
                       f"max chain-rule gap {worst:.2e}")


def check_mi_monte_carlo(seed: int = 1, draws: int = 4,
                         n: int = 200_000) -> CheckResult:
    """Analytic conditional information against the sampling estimate."""
    rng = np.random.default_rng(seed)
    cfg = validate_config({})
    misses = 0
    details = []
    for k in range(draws):
        params = GpParams(
            tau=float(rng.uniform()), kappa=float(rng.uniform()),
            alpha1=float(rng.standard_normal()), alpha2=float(rng.standard_normal()),
            alpha3=float(rng.standard_normal()), alpha4=float(rng.standard_normal()),
            beta1=float(rng.standard_normal()), beta2=float(rng.standard_normal()),
        )
        table = assemble_covariance(cfg, params, Scheme.CUMS2)
        system = build_system(Scheme.CUMS2)
        term = system.inequalities[k % len(system.inequalities)].terms[0]
        exact = conditional_mi(table, term.a, term.b, term.c)
        est, se = gaussian_mi_mc(table, term.a, term.b, term.c, n=n,
                                 seed=int(rng.integers(2**31)))
        dev = abs(est - exact) / max(se, 1e-12)
        details.append(f"{dev:.1f}se")
        if dev > 4.0:
            misses += 1
    return CheckResult("info-monte-carlo", misses == 0,
                       f"deviations {', '.join(details)}")


def check_polytope_grid(seed: int = 2, systems: int = 6) -> CheckResult:
    """Enumerated-vertex hulls against 0.01-step grid feasibility scans."""
    rng = np.random.default_rng(seed)
    for _ in range(systems):
        caps = rng.uniform(0.5, 1.5, size=2)
        extra = rng.uniform(0.5, 2.0)
        a = np.vstack([np.eye(2), rng.uniform(0.2, 1.0, size=(1, 2))])
        b = np.concatenate([caps, [extra]])
        verts = enumerate_vertices(HalfspaceSystem(a, b)).points
        poly = convex_hull_2d(verts)
        xs = np.arange(0.0, caps[0] + 0.01, 0.01)
        ys = np.arange(0.0, caps[1] + 0.01, 0.01)
        gx, gy = np.meshgrid(xs, ys)
        grid = np.column_stack([gx.ravel(), gy.ravel()])
        feasible = np.all(grid @ a.T <= b + 1e-12, axis=1)
        inside = point_in_polygon_ccw(poly, grid[feasible], tol=1e-6)
        if not inside.all():
            return CheckResult("polytope-grid-oracle", False,
                               "feasible grid point escaped the hull")
        ok = np.all(verts @ a.T <= b + 1e-7 * (1 + np.abs(b)), axis=1)
        if not ok.all():
            return CheckResult("polytope-grid-oracle", False,
                               "hull vertex infeasible")
    return CheckResult("polytope-grid-oracle", True, f"{systems} systems scanned")


def check_waterfill(seed: int = 3, trials: int = 50) -> CheckResult:
    """Power conservation, uniform level, and inactive-mode condition."""
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        sigmas = rng.uniform(0.05, 3.0, size=rng.integers(1, 6))
        power = float(rng.uniform(0.0, 20.0))
        noise = float(rng.uniform(0.5, 2.0))
        powers, level = waterfill(sigmas, power, noise)
        if abs(powers.sum() - power) > 1e-9:
            return CheckResult("waterfill-kkt", False, "power not conserved")
        inv = noise / sigmas**2
        active = powers > 1e-12
        if np.any(active) and np.max(np.abs(powers[active] + inv[active] - level)) > 1e-9:
            return CheckResult("waterfill-kkt", False, "uneven water level")
        if power > 0 and np.any(~active) and np.any(inv[~active] < level - 1e-9):
            return CheckResult("waterfill-kkt", False,
                               "inactive mode below the water level")
    return CheckResult("waterfill-kkt", True, f"{trials} mode sets")


def check_mac_consistency(seed: int = 4, trials: int = 30) -> CheckResult:
    """Decode-order-invariant sum rate and submodular rank function."""
    import itertools

    rng = np.random.default_rng(seed)
    cfg = validate_config({})
    rows = channel_rows(cfg)
    noise = cfg.effective_mac_noise

    def rank(split, subset):
        g = np.eye(3)
        for i in subset:
            g += split[i] / noise * np.outer(rows[i], rows[i])
        return 0.5 * np.linalg.slogdet(g)[1] / math.log(2)

    for _ in range(trials):
        split = rng.uniform(0, 15, size=3)
        sums = [
            mac_rate_vector(rows, split, order, noise).sum()
            for order in itertools.permutations(range(3))
        ]
        if max(sums) - min(sums) > 1e-9:
            return CheckResult("mac-consistency", False, "sum rate varies with order")
        users = (0, 1, 2)
        for s_small in itertools.chain.from_iterable(
            itertools.combinations(users, k) for k in range(3)
        ):
            for t_extra in itertools.combinations(
                [u for u in users if u not in s_small], 2
            ):
                s, t = set(s_small), set(s_small) | set(t_extra)
                i = t_extra[0]
                gain_small = rank(split, s | {i}) - rank(split, s)
                gain_big = rank(split, t | {i}) - rank(split, t)
                if gain_big > gain_small + 1e-9:
                    return CheckResult("mac-consistency", False,
                                       "rank function not submodular")
    return CheckResult("mac-consistency", True, f"{trials} splits")


def check_region_containment(cfg: ChannelConfig, samples: int = 400,
                             resolution: int = 41) -> CheckResult:
    """Sampled achievable points never escape the outer bound."""
    worst = "ok"
    for scheme in (Scheme.CUMS2, Scheme.PRMS2, Scheme.COMS):
        cloud = compute_region(cfg, SamplingSpec(samples, 11, scheme))
        outer = outer_region(scheme, cfg, resolution)
        inside = outer.contains(cloud.points, tol=1e-6)
        if not inside.all():
            return CheckResult(
                "region-containment", False,
                f"{int((~inside).sum())} points escaped for {scheme.value}"
            )
    return CheckResult("region-containment", True, worst)


def check_corollary_containment(cfg: ChannelConfig,
                                resolution: int = 61) -> CheckResult:
    """Closed-form points sit inside their scheme's outer bound."""
    outers = {}
    for cid in ALL_IDS:
        scheme = scheme_for_corollary(cid)
        if scheme not in outers:
            outers[scheme] = outer_region(scheme, cfg, resolution)
        pts = points_array(corollary_points(cid, cfg, grid=11))
        inside = outers[scheme].contains(pts, tol=1e-6)
        if not inside.all():
            return CheckResult("corollary-containment", False,
                               f"family {cid} point escaped")
    return CheckResult("corollary-containment", True, "families 1..9")


def check_decoupled_box(samples: int = 10) -> CheckResult:
    """Zero cross gains with zero coefficients give the free-channel box.

    The box corner needs the degenerate split where the public
    sub-messages carry nothing (both fractions zero), so that member of
    the parameter family is sampled explicitly alongside random splits.
    """
    cfg = validate_config({g: 0.0 for g in
                           ("a12", "a13", "a21", "a23", "a31", "a32")})
    zero = {k: 0.0 for k in ("alpha1", "alpha2", "alpha3", "alpha4",
                             "beta1", "beta2")}
    cloud = compute_region(cfg, SamplingSpec(samples, 5, Scheme.CUMS2,
                                             overrides=zero))
    corner_spec = SamplingSpec(1, 5, Scheme.CUMS2,
                               overrides={**zero, "tau": 0.0, "kappa": 0.0})
    points = np.vstack([cloud.points,
                        compute_region(cfg, corner_spec).points])
    caps = np.array([0.5 * math.log2(1 + p / q)
                     for p, q in zip(cfg.powers, cfg.noises)])
    hi = points.max(axis=0)
    if np.max(np.abs(hi - caps)) > 1e-6:
        return CheckResult("decoupled-box", False, f"axis maxima {hi}")
    if np.any(points > caps + 1e-6):
        return CheckResult("decoupled-box", False, "point above the box")
    corner_hit = np.any(np.all(np.abs(points - caps) <= 1e-6, axis=1))
    return CheckResult("decoupled-box", corner_hit,
                       "box corner achieved" if corner_hit else "corner missing")


def check_discrete_oracle(seed: int = 6) -> CheckResult:
    """Chain-built pmfs verify their factorization and exact chain rule."""
    for scheme in Scheme:
        pmf = random_scheme_pmf(scheme, seed=seed, q_size=2)
        ok, dev = check_factorization(pmf, scheme_factorization(scheme))
        if not ok:
            return CheckResult("discrete-oracle", False,
                               f"{scheme.value} factorization deviates {dev:.1e}")
    pmf = random_scheme_pmf(Scheme.COMS, seed=seed + 1, q_size=2)
    lhs = mi_discrete(pmf, ("W", "U"), ("Y1",), ("Q",))
    rhs = mi_discrete(pmf, ("W",), ("Y1",), ("Q",)) + mi_discrete(
        pmf, ("U",), ("Y1",), ("W", "Q"))
    if abs(lhs - rhs) > 1e-12:
        return CheckResult("discrete-oracle", False, "discrete chain rule broken")
    return CheckResult("discrete-oracle", True, "factorizations and chain rule")


def run_all(cfg: ChannelConfig | None = None) -> list[CheckResult]:
    cfg = cfg or validate_config({})
    return [
        check_mi_chain_rule(),
        check_mi_monte_carlo(),
        check_polytope_grid(),
        check_waterfill(),
        check_mac_consistency(),
        check_region_containment(cfg),
        check_corollary_containment(cfg),
        check_decoupled_box(),
        check_discrete_oracle(),
    ]
