import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lrbounds.bounds import (
    BoundConstants,
    MuPolicy,
    bound_compliance,
    causal_contour,
    ceil_mu_r,
    crossover_rc,
    hk_bound,
    hk_contour,
    hybrid_bound,
    log10_hk_bound,
    long_range_log_partial_sum,
    long_range_log_term,
    long_range_term,
    short_range_log_partial_sum,
    short_range_log_term,
    short_range_term,
    verify_partial_sums,
)
from lrbounds.config import MuMode
from lrbounds.lattice import CouplingModel


@pytest.fixture(scope="module")
def alpha3():
    return BoundConstants.from_alpha(3.0)


@pytest.fixture(scope="module")
def nearest():
    return BoundConstants.from_alpha(math.inf)


class TestConstants:
    def test_nearest_neighbor(self, nearest):
        assert nearest.lam == 3.0
        assert nearest.c1 == pytest.approx(1 / 3)
        assert nearest.v1 == pytest.approx(18 * math.e)
        assert nearest.c2 == pytest.approx(1 / 36)
        assert nearest.v2 == pytest.approx(216.0)
        assert nearest.hk_c is None and nearest.hk_v is None
        assert nearest.is_nearest_neighbor

    def test_finite_alpha(self):
        constants = BoundConstants.from_alpha(2.0)
        lam = 1 + np.pi**2 / 3
        assert_allclose(constants.lam, lam, rtol=1e-12)
        assert_allclose(constants.hk_c, 1 / (8 * lam))
        assert_allclose(constants.hk_v, 16 * lam**2)
        assert_allclose(constants.v1, 2 * math.e * lam**2)

    def test_hk_velocity_grows_exponentially(self):
        low, high = BoundConstants.from_alpha(2.0), BoundConstants.from_alpha(6.0)
        assert_allclose(high.hk_v / low.hk_v, 2**4 * (high.lam / low.lam) ** 2, rtol=1e-12)
        assert_allclose(high.hk_c / low.hk_c, 2**-4 * low.lam / high.lam, rtol=1e-12)

    def test_equal_velocities(self):
        constants = BoundConstants.from_alpha(3.0, equal_velocities=True)
        assert constants.v1 == constants.v2
        assert constants.equal_velocities

    def test_finite_row_lambda(self):
        model = CouplingModel(3.0, 5)
        constants = BoundConstants.from_model(model, lambda_mode="finite-row-max")
        assert constants.lam < BoundConstants.from_alpha(3.0).lam


def test_mu_policy():
    assert MuPolicy.fixed(0.3).mu == 0.3
    assert MuPolicy.optimized().mode == MuMode.OPTIMIZED
    assert MuPolicy("fixed", 0.5).mode == MuMode.FIXED

    for mu in [0.0, 1.0, None]:
        with pytest.raises(RuntimeError, match="strictly inside"):
            MuPolicy("fixed", mu)
    with pytest.raises(RuntimeError, match="Unrecognized mu policy"):
        MuPolicy("best")


def test_ceil_mu_r():
    assert ceil_mu_r(0.1, 30) == 3
    assert ceil_mu_r(0.5, 7) == 4
    assert ceil_mu_r(0.25, 1) == 1


class TestHybridBound:
    def test_zero_at_t0(self, alpha3):
        for policy in [MuPolicy.fixed(0.5), MuPolicy.optimized()]:
            bound = hybrid_bound(3.0, 0.0, policy, alpha3)
            assert bound.value == 0.0
            assert bound.term_short == 0.0 and bound.term_long == 0.0
            assert bound.log10_raw == -math.inf
        assert hk_bound(3.0, 0.0, alpha3) == 0.0

    def test_terms_match_closed_form(self, alpha3):
        r, t, mu = 20.0, 0.01, 0.4
        short = alpha3.c1 * math.expm1(alpha3.v1 * t) * math.exp(-mu * r)
        long = alpha3.c2 * math.expm1(alpha3.v2 * t) / ((1 - mu) * r) ** 3
        assert_allclose(short_range_term(r, t, mu, alpha3), short, rtol=1e-12)
        assert_allclose(long_range_term(r, t, mu, alpha3), long, rtol=1e-12)

        bound = hybrid_bound(r, t, MuPolicy.fixed(mu), alpha3)
        assert_allclose(bound.value, short + long, rtol=1e-12)
        assert bound.mu_used == mu

    def test_nearest_neighbor_has_no_long_range_term(self, nearest):
        assert long_range_term(10.0, 1.0, 0.5, nearest) == 0.0
        bound = hybrid_bound(10.0, 0.1, MuPolicy.fixed(0.5), nearest)
        assert_allclose(bound.value, short_range_term(10.0, 0.1, 0.5, nearest))
        with pytest.raises(RuntimeError, match="finite alpha"):
            hk_bound(10.0, 0.1, nearest)

    def test_monotone(self, alpha3):
        policy = MuPolicy.fixed(0.5)
        in_r = [hybrid_bound(r, 0.02, policy, alpha3).value for r in [2, 5, 10, 50]]
        in_t = [hybrid_bound(10.0, t, policy, alpha3).value for t in [0.001, 0.01, 0.02]]
        assert np.all(np.diff(in_r) < 0)
        assert np.all(np.diff(in_t) > 0)

    @pytest.mark.parametrize(
        "r, t, mu", [(4.0, 0.01, 0.5), (10.0, 0.001, 0.8), (20.0, 0.1, 0.25), (100.0, 1.0, 0.5)]
    )
    def test_nonincreasing_in_alpha(self, r, t, mu):
        # needs (1 - mu) r >= 1 so that the power-law tail shrinks with alpha
        policy = MuPolicy.fixed(mu)
        log_bounds = [
            hybrid_bound(r, t, policy, BoundConstants.from_alpha(alpha)).log10_raw
            for alpha in [1.5, 2.0, 3.0, 6.0, 12.0]
        ]
        assert np.all(np.isfinite(log_bounds))
        assert np.all(np.diff(log_bounds) <= 1e-12)

    def test_capped_in_log_space(self, alpha3):
        # e^{v t} overflows a double here
        bound = hybrid_bound(5.0, 50.0, MuPolicy.fixed(0.5), alpha3)
        assert bound.value == 1.0
        assert bound.term_long == math.inf
        assert math.isfinite(bound.log10_raw) and bound.log10_raw > 300
        assert hk_bound(5.0, 50.0, alpha3) == 1.0
        assert math.isfinite(log10_hk_bound(5.0, 50.0, alpha3))

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0, 6.0, math.inf])
    @pytest.mark.parametrize("r, t", [(10.0, 0.01), (40.0, 0.05), (100.0, 0.5)])
    def test_optimized_mu_never_worse(self, alpha, r, t):
        constants = BoundConstants.from_alpha(alpha)
        optimized = hybrid_bound(r, t, MuPolicy.optimized(), constants)
        assert 0.01 <= optimized.mu_used <= 0.99
        for mu in [0.25, 0.5, 0.75]:
            fixed = hybrid_bound(r, t, MuPolicy.fixed(mu), constants)
            assert optimized.log10_raw <= fixed.log10_raw + 1e-8

    def test_log_terms_broadcast_over_mu(self, alpha3):
        mus = np.array([0.2, 0.5, 0.8])
        short = short_range_log_term(10.0, 0.1, mus, alpha3)
        long = long_range_log_term(10.0, 0.1, mus, alpha3)
        assert short.shape == long.shape == (3,)
        assert np.all(np.diff(short) < 0)
        assert np.all(np.diff(long) > 0)

    def test_invalid_points(self, alpha3):
        with pytest.raises(RuntimeError, match="r >= 1"):
            hybrid_bound(0.5, 1.0, MuPolicy.optimized(), alpha3)
        with pytest.raises(RuntimeError, match="t >= 0"):
            hk_bound(2.0, -1.0, alpha3)
        with pytest.raises(RuntimeError, match="mu must lie"):
            short_range_term(2.0, 1.0, 1.0, alpha3)


class TestContours:
    def test_nearest_neighbor_contour_is_linear(self, nearest):
        mu = 0.5
        contour = causal_contour(0.01, [40, 80, 120], MuPolicy.fixed(mu), nearest)
        t_star = np.array([t for _, t in contour])
        slope = mu / nearest.v1
        assert_allclose(np.diff(t_star), 40 * slope, rtol=1e-6)

    def test_contour_hits_epsilon(self, alpha3):
        policy = MuPolicy.fixed(0.5)
        for r, t_star in causal_contour(0.05, [2, 10, 30], policy, alpha3):
            assert_allclose(hybrid_bound(r, t_star, policy, alpha3).value, 0.05, rtol=1e-7)
        for r, t_star in hk_contour(0.05, [2, 10, 30], alpha3):
            assert_allclose(hk_bound(r, t_star, alpha3), 0.05, rtol=1e-7)

    def test_contour_slows_with_alpha(self):
        policy = MuPolicy.optimized()
        t_star = [
            causal_contour(0.01, [50], policy, BoundConstants.from_alpha(alpha))[0][1]
            for alpha in [2.0, 3.0, 6.0]
        ]
        assert np.all(np.diff(t_star) > 0)

    def test_hk_contour_speeds_up_with_alpha(self):
        # the 2^alpha velocity wins over the faster spatial decay
        slow = hk_contour(0.01, [100], BoundConstants.from_alpha(3.0))[0][1]
        fast = hk_contour(0.01, [100], BoundConstants.from_alpha(6.0))[0][1]
        assert fast < slow

    def test_contour_grows_with_distance(self, alpha3):
        contour = causal_contour(0.01, [1, 5, 25, 125], MuPolicy.optimized(), alpha3)
        assert np.all(np.diff([t for _, t in contour]) > 0)

    def test_invalid_epsilon(self, alpha3):
        with pytest.raises(RuntimeError, match="strictly inside"):
            causal_contour(1.5, [2], MuPolicy.optimized(), alpha3)
        with pytest.raises(RuntimeError, match="strictly inside"):
            hk_contour(0.0, [2], alpha3)


class TestCrossover:
    def test_terms_balance(self):
        constants = BoundConstants.from_alpha(3.0, equal_velocities=True)
        r_c = crossover_rc(0.1, 0.5, constants)
        assert r_c > 6.0
        assert_allclose(
            long_range_log_term(r_c, 0.1, 0.5, constants),
            short_range_log_term(r_c, 0.1, 0.5, constants),
            atol=1e-9,
        )

    def test_equal_velocities_time_independent(self):
        constants = BoundConstants.from_alpha(3.0, equal_velocities=True)
        assert_allclose(crossover_rc(0.01, 0.5, constants), crossover_rc(1.0, 0.5, constants))

    def test_grows_with_alpha(self):
        r_c = [
            crossover_rc(0.01, 0.5, BoundConstants.from_alpha(alpha, equal_velocities=True))
            for alpha in [2.0, 3.0, 6.0]
        ]
        assert np.all(np.diff(r_c) > 0)

    def test_limits(self, alpha3, nearest):
        # v2 > v1, so at late times the long-range term wins everywhere
        assert crossover_rc(1.0, 0.5, alpha3) == 1.0
        assert crossover_rc(1.0, 0.5, nearest) == math.inf
        with pytest.raises(RuntimeError, match="t > 0"):
            crossover_rc(0.0, 0.5, alpha3)


class TestPartialSums:
    @pytest.mark.parametrize("alpha", [1.5, 3.0, math.inf])
    def test_partial_sums_below_terms(self, alpha):
        constants = BoundConstants.from_alpha(alpha)
        report = verify_partial_sums(constants, [0.25, 0.5, 0.75], 30, np.linspace(0, 2, 5))
        assert report.passed, report.failures[:3]
        names = {check.inequality for check in report.checks}
        expected = {"short-partial-sum"} if math.isinf(alpha) else {
            "short-partial-sum",
            "long-partial-sum",
        }
        assert names == expected

    def test_empty_sums(self, alpha3):
        # mu r <= 1 leaves no low orders
        assert long_range_log_partial_sum(1, 1.0, 0.5, alpha3) == -math.inf
        assert short_range_log_partial_sum(10, 0.0, 0.5, alpha3, 50) == -math.inf
        assert short_range_log_partial_sum(10, 1.0, 0.5, alpha3, 2) == -math.inf

    def test_single_order(self, alpha3):
        # only n = 1 survives below ceil(0.5 * 4) = 2
        t = 0.3
        expected = math.log(2 * alpha3.lam * t) - 3 * math.log(4)
        assert_allclose(long_range_log_partial_sum(4, t, 0.5, alpha3), expected)


class TestCompliance:
    def test_flags(self, alpha3):
        r = [0, 1, 5, 5]
        t = [0.1, 0.001, 0.5, 0.5]
        q = [0.5, 0.9, 0.0, 1e-14]
        columns = bound_compliance(r, t, q, alpha3, MuPolicy.optimized())
        assert columns["compliant"].tolist() == [True, False, True, True]
        assert np.isnan(columns["hybrid_bound"][0])
        assert np.all(columns["hybrid_bound"][1:] <= 1.0)
        assert np.all(np.isfinite(columns["hk_bound"][1:]))

    def test_round_off_floor(self, nearest):
        # the bound underflows far outside the light cone while numerics leave ~1e-16
        columns = bound_compliance([100], [0.001], [3e-16], nearest, MuPolicy.fixed(0.5))
        assert columns["hybrid_bound"][0] < 1e-16
        assert columns["compliant"].all()
        assert np.isnan(columns["hk_bound"][0])
