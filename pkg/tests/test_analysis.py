import logging
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from l2fe_lab.analysis import (
    SecurityParams,
    ball_union_volume_log2,
    calibrated_radius,
    certify_params,
    check_output_bits,
    extractable_bits,
    gamma_bound,
    majority_success,
    majority_votes_needed,
    min_entropy_uniform,
    min_radius,
    quantization_mismatch_rate,
)
from l2fe_lab.errors import InfeasibleBoost, InvalidParameter


def test_union_volume_small_cases():
    # disc of radius 1: area pi; 4-ball: pi^2 / 2
    assert ball_union_volume_log2(3, 1.0, 2) == pytest.approx(math.log2(3 * math.pi))
    assert ball_union_volume_log2(1, 1.0, 4) == pytest.approx(math.log2(math.pi**2 / 2))
    assert ball_union_volume_log2(1, 1.0, 4) == pytest.approx(2.30299, abs=1e-5)


@given(st.floats(0.01, 10), st.sampled_from([2, 4, 8, 64, 512]), st.floats(1, 1e6))
def test_union_volume_scaling(eps, m, beta):
    base = ball_union_volume_log2(beta, eps, m)
    assert ball_union_volume_log2(beta, 2 * eps, m) == pytest.approx(base + m, rel=1e-9, abs=1e-6)
    assert ball_union_volume_log2(2 * beta, eps, m) == pytest.approx(base + 1, rel=1e-9, abs=1e-6)


def test_union_volume_large_m_is_finite():
    v = ball_union_volume_log2(1000, 0.3, 512)
    assert math.isfinite(v) and v < 0


@pytest.mark.parametrize("m", [1, 3, 0])
def test_union_volume_rejects_odd_m(m):
    with pytest.raises(InvalidParameter):
        ball_union_volume_log2(2, 1.0, m)


def test_min_entropy_uniform_example():
    assert min_entropy_uniform(4, 1.0, 2) == pytest.approx(3.6515, abs=1e-4)


def test_gamma_bound_example_and_regression():
    assert gamma_bound(3.6515, 2, 2.0, 10) == pytest.approx(-3.1331, abs=1e-4)
    # pinned: the default operating point
    h = min_entropy_uniform(1000, 0.3, 180)
    assert gamma_bound(h, 180, 1.1, 1e4) == pytest.approx(h + 180 * math.log2(1.1) - 180 * math.log2(20001))


@given(st.floats(-100, 100), st.floats(1.01, 5), st.floats(1, 1e5))
def test_gamma_monotone(h, alpha, R):
    g = gamma_bound(h, 8, alpha, R)
    assert gamma_bound(h + 1, 8, alpha, R) > g
    assert gamma_bound(h, 8, alpha * 1.1, R) > g
    assert gamma_bound(h, 8, alpha, R * 2) < g


def test_gamma_rejects_bad_inputs():
    with pytest.raises(InvalidParameter):
        gamma_bound(1, 2, 1.0, 10)
    with pytest.raises(InvalidParameter):
        gamma_bound(1, 2, 2.0, 0.5)


def test_extractable_bits():
    assert extractable_bits(100.0, 0.5) == 100  # 100 - 2 + 2
    assert extractable_bits(101.5, 2**-20) == 63
    assert extractable_bits(-50.0, 0.5) == 0
    assert extractable_bits(-math.inf, 0.5) == 0
    for bad in (0.0, 1.0):
        with pytest.raises(InvalidParameter):
            extractable_bits(10, bad)


def test_min_radius_default_point():
    r = min_radius(180, 60, 130003, 1.0)
    oracle = math.sqrt(180 / (2 * math.pi * math.e)) * 130003 ** (2 / 3)
    assert r == pytest.approx(oracle, rel=1e-12)
    assert r == pytest.approx(8331.9, rel=0.01)


def test_certify_feasible_toy():
    rep = certify_params(SecurityParams(m=2, l=1, q=17, R=10, alpha=2.0, eps_fe=0.5, beta=100, epsilon=1.0))
    assert rep.log2_volume == pytest.approx(math.log2(100 * math.pi))
    assert rep.gamma == pytest.approx(math.log2(100 * math.pi) + 2 - 2 * math.log2(21))
    assert rep.kappa_max == 1
    assert rep.radius_ok and rep.packing_ok and rep.feasible


def test_certify_default_point_infeasible(caplog):
    rep = certify_params(SecurityParams(180, 60, 130003, 1e4, 1.1, 2**-40, 1000, 0.3))
    assert rep.kappa_max == 0 and not rep.feasible
    assert rep.radius_ok
    with caplog.at_level(logging.WARNING):
        assert not check_output_bits(256, rep)
    assert "exceeds" in caplog.text
    assert check_output_bits(0, rep)


def test_certify_radius_and_packing_failures():
    small_r = certify_params(SecurityParams(2, 1, 17, 1.0, 2.0, 0.5, 1, 0.5))
    assert not small_r.radius_ok and not small_r.feasible
    overfull = certify_params(SecurityParams(2, 1, 17, 10, 2.0, 0.5, 1e6, 1.0))
    assert not overfull.packing_ok and not overfull.feasible


def test_certify_degenerate_epsilon():
    rep = certify_params(SecurityParams(4, 2, 17, 10, 2.0, 0.5, 10, 0.0))
    assert rep.log2_volume == -math.inf and rep.kappa_max == 0 and not rep.feasible


def test_security_params_validation():
    ok = dict(m=4, l=2, q=17, R=10, alpha=2.0, eps_fe=0.5, beta=10, epsilon=0.1)
    SecurityParams(**ok)
    for bad in (dict(alpha=1.0), dict(eps_fe=1.0), dict(l=4), dict(m=5), dict(q=16), dict(beta=0.5), dict(epsilon=-1)):
        with pytest.raises(InvalidParameter):
            SecurityParams(**{**ok, **bad})


def _exact_majority(n, p):
    p = Fraction(p)
    return sum(math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n // 2 + 1, n + 1))


def test_majority_votes_against_exact_sum():
    n = 1
    while _exact_majority(n, "0.65") < Fraction(95, 100):
        n += 2
    assert majority_votes_needed(0.65, 0.05) == n == 29
    assert majority_votes_needed(0.9, 0.01) == 5


@pytest.mark.parametrize("n", [1, 3, 7, 21, 51])
def test_majority_success_matches_exact(n):
    assert majority_success(n, 0.65) == pytest.approx(float(_exact_majority(n, "0.65")), rel=1e-10)


def test_majority_votes_monotone():
    prev = 10**9
    for p in (0.55, 0.6, 0.7, 0.8, 0.95):
        n = majority_votes_needed(p, 0.05)
        assert n % 2 == 1 and n <= prev
        prev = n
    assert majority_votes_needed(0.7, 0.01) >= majority_votes_needed(0.7, 0.1)


def test_majority_votes_errors():
    with pytest.raises(InfeasibleBoost):
        majority_votes_needed(0.5, 0.05)
    with pytest.raises(InfeasibleBoost):
        majority_votes_needed(0.51, 1e-6, max_n=11)
    with pytest.raises(InvalidParameter):
        majority_votes_needed(0.7, 0.6)
    assert majority_votes_needed(1.0, 0.05) == 1


def test_calibrated_radius_inverts_mismatch_rate():
    step = 2 / (130003 * 0.0014)
    eps = calibrated_radius(180, step, 0.01)
    assert eps == pytest.approx(7.26e-6, rel=0.01)
    assert quantization_mismatch_rate(eps, 180, step) == pytest.approx(0.01)
    with pytest.raises(InvalidParameter):
        calibrated_radius(180, step, 0.0)
