import math
from pathlib import Path

import numpy as np
import pytest

from cogrates.constraints import build_system, evaluate_system
from cogrates.gaussinfo import assemble_covariance
from cogrates.model import (
    ChannelConfig,
    ChannelGains,
    ConfigError,
    GpParams,
    Scheme,
    validate_config,
)

DATA = Path(__file__).parent / "data"

EXPECTED_COUNTS = {
    Scheme.CUMS1: 36,
    Scheme.PRMS1: 36,
    Scheme.CUMS2: 10,
    Scheme.PRMS2: 10,
    Scheme.COMS: 7,
}


@pytest.mark.parametrize("scheme,count", sorted(EXPECTED_COUNTS.items(),
                                                key=lambda kv: kv[0].value))
def test_inequality_counts(scheme, count):
    system = build_system(scheme)
    assert len(system.inequalities) == count
    assert system.rate_names == scheme.split_rate_names


@pytest.mark.parametrize("scheme", list(Scheme))
def test_dump_matches_golden(scheme):
    golden = (DATA / f"system_{scheme.value}.txt").read_text()
    assert build_system(scheme).dump() == golden


def test_cums2_decoder_groups():
    """Term-level spot checks on the secondary-splitting cumulative system:
    four bounds at receiver 1, three at receiver 2, three at receiver 3."""
    system = build_system(Scheme.CUMS2)
    first = system.inequalities[0]
    assert first.rates == ("r11",)
    assert first.terms[0].a == ("W",)
    assert first.terms[0].b == ("U1", "V1", "Y1")
    by_rates = {q.rates: q for q in system.inequalities}
    triple = by_rates[("r11", "r21", "r31")]
    assert [t.sign for t in triple.terms] == [1, 1, -1]
    assert triple.terms[2].a == ("W", "U1", "U2")
    assert triple.terms[2].b == ("V1",)
    y1 = [q for q in system.inequalities if any("Y1" in t.b for t in q.terms)]
    y2 = [q for q in system.inequalities if any("Y2" in t.b for t in q.terms)]
    y3 = [q for q in system.inequalities if any("Y3" in t.b for t in q.terms)]
    assert (len(y1), len(y2), len(y3)) == (4, 3, 3)


def test_scheme1_penalty_sets_differ():
    cums = build_system(Scheme.CUMS1).dump()
    prms = build_system(Scheme.PRMS1).dump()
    assert "I(W0,W1,U0,U2;V0|Q)" in cums
    assert "I(W0,W1,U0,U2;V0|Q)" not in prms
    assert "I(W0,W1;V0|Q)" in prms


def test_evaluate_decoupled_single_rate_bound():
    cfg = validate_config({g: 0.0 for g in
                           ("a12", "a13", "a21", "a23", "a31", "a32")})
    table = assemble_covariance(cfg, GpParams(0.5, 0.5), Scheme.CUMS2)
    num = evaluate_system(build_system(Scheme.CUMS2), table)
    assert num.rhs[0] == pytest.approx(0.5 * math.log2(1 + 10.0), abs=1e-9)
    assert num.feasible


def test_evaluate_flags_negative_binning_penalty():
    # a large coefficient makes the public-part bin penalty exceed what
    # receiver 2 can decode, driving the single-rate bound negative
    cfg = validate_config({})
    table = assemble_covariance(cfg, GpParams(0.5, 0.5, alpha1=25.0), Scheme.CUMS2)
    num = evaluate_system(build_system(Scheme.CUMS2), table)
    r21_row = list(build_system(Scheme.CUMS2).inequalities).index(
        next(q for q in build_system(Scheme.CUMS2).inequalities
             if q.rates == ("r21",)))
    assert num.rhs[r21_row] < 0
    assert not num.feasible


def test_evaluate_zero_power_origin_polytope():
    cfg = ChannelConfig(p1=0, p2=0, p3=0)
    table = assemble_covariance(cfg, GpParams(0.5, 0.5), Scheme.CUMS2)
    num = evaluate_system(build_system(Scheme.CUMS2), table)
    assert np.allclose(num.rhs, 0.0)
    assert num.feasible


def test_evaluate_rejects_label_mismatch():
    cfg = validate_config({})
    table = assemble_covariance(cfg, GpParams(), Scheme.COMS)
    with pytest.raises(ConfigError, match="labels"):
        evaluate_system(build_system(Scheme.CUMS2), table)


def test_gaussian_evaluation_rejected_for_all_splitting_schemes():
    cfg = validate_config({})
    table = assemble_covariance(cfg, GpParams(), Scheme.CUMS2)
    with pytest.raises(ConfigError, match="discrete"):
        evaluate_system(build_system(Scheme.CUMS1), table)


USER_OF_RATE = {"r11": 0, "r21": 1, "r22": 1, "r31": 2, "r33": 2,
                "r1": 0, "r2": 1}


def test_single_rate_bounds_respect_point_to_point_capacity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        cfg = ChannelConfig(
            *rng.uniform(0.5, 20, size=3), *rng.uniform(0.5, 2, size=3),
            gains=ChannelGains(*rng.uniform(0, 1.2, size=6)),
        )
        params = GpParams(tau=float(rng.uniform()), kappa=float(rng.uniform()))
        caps = [0.5 * math.log2(1 + p / q)
                for p, q in zip(cfg.powers, cfg.noises)]
        for scheme in (Scheme.CUMS2, Scheme.PRMS2, Scheme.COMS):
            system = build_system(scheme)
            num = evaluate_system(system,
                                  assemble_covariance(cfg, params, scheme))
            for ineq, value in zip(system.inequalities, num.rhs):
                if len(ineq.rates) == 1:
                    assert value <= caps[USER_OF_RATE[ineq.rates[0]]] + 1e-9


def test_rhs_monotone_in_power_scaling():
    rng = np.random.default_rng(4)
    for _ in range(15):
        p = rng.uniform(0.5, 20, size=3)
        q = rng.uniform(0.5, 2, size=3)
        gains = ChannelGains(*rng.uniform(0, 1.2, size=6))
        params = GpParams(tau=float(rng.uniform()), kappa=float(rng.uniform()))
        scale = float(rng.uniform(1.2, 4.0))
        for scheme in (Scheme.CUMS2, Scheme.PRMS2, Scheme.COMS):
            system = build_system(scheme)
            lo = evaluate_system(system, assemble_covariance(
                ChannelConfig(*p, *q, gains=gains), params, scheme)).rhs
            hi = evaluate_system(system, assemble_covariance(
                ChannelConfig(*(p * scale), *q, gains=gains), params, scheme)).rhs
            assert np.all(hi >= lo - 1e-9)


def test_cumulative_dominates_primary_only_at_matched_params():
    """With no cross-coupling coefficients the cumulative system's bounds
    are at least the primary-only system's, inequality by inequality."""
    rng = np.random.default_rng(5)
    cfg = validate_config({})
    for _ in range(10):
        params = GpParams(*rng.uniform(0.05, 0.95, size=2),
                          *rng.standard_normal(4), 0.0, 0.0)
        rc = evaluate_system(build_system(Scheme.CUMS2),
                             assemble_covariance(cfg, params, Scheme.CUMS2)).rhs
        rp = evaluate_system(build_system(Scheme.PRMS2),
                             assemble_covariance(cfg, params, Scheme.PRMS2)).rhs
        assert np.all(rc >= rp - 1e-9)
