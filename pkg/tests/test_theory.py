import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from bailab.errors import NonPositiveSigmaError, NonPositiveVarianceError, ValidationError
from bailab.theory import (
    aipw_variance,
    ipw_rate,
    ipw_variance,
    lower_bound_rate,
    normal_cdf,
    normalized_score,
    oracle_exact_error,
    rate_report,
    target_allocation,
)

pos_sigma = st.floats(0.01, 100.0)
mean_val = st.floats(-50.0, 50.0)


class TestNormalCdf:
    @pytest.mark.parametrize("x", [-8.0, -3.0, -1.0, -0.1, 0.0, 0.1, 1.0, 3.0, 8.0])
    def test_matches_scipy(self, x):
        assert normal_cdf(x) == pytest.approx(norm.cdf(x), rel=1e-12)

    def test_phi_minus_one(self):
        assert normal_cdf(-1.0) == pytest.approx(0.15865525393145707, rel=1e-12)

    @given(st.floats(-10, 10))
    def test_symmetry(self, x):
        assert normal_cdf(x) + normal_cdf(-x) == pytest.approx(1.0, abs=1e-14)


class TestTargetAllocation:
    def test_symmetric(self):
        assert target_allocation(1.0, 1.0) == (0.5, 0.5)

    def test_one_three(self):
        w = target_allocation(1.0, 3.0)
        assert w[0] == pytest.approx(0.25)
        assert w[1] == pytest.approx(0.75)

    def test_five_five(self):
        assert target_allocation(5.0, 5.0) == (0.5, 0.5)

    def test_rejects_nonpositive(self):
        with pytest.raises(NonPositiveSigmaError):
            target_allocation(0.0, 1.0)

    @given(pos_sigma, pos_sigma)
    def test_sums_to_one(self, s1, s2):
        w1, w2 = target_allocation(s1, s2)
        assert w1 + w2 == 1.0
        assert 0.0 < w1 < 1.0


class TestRates:
    def test_lower_bound_zero_gap(self):
        assert lower_bound_rate(0.0, 1.0, 1.0) == 0.0

    def test_lower_bound_examples(self):
        assert lower_bound_rate(0.2, 1.0, 1.0) == pytest.approx(0.005)
        assert lower_bound_rate(0.1, 1.0, 1.0) == pytest.approx(0.00125)

    def test_aipw_variance_is_squared_sum(self):
        assert aipw_variance(1.0, 1.0) == 4.0
        assert aipw_variance(1.0, 5.0) == 36.0

    def test_ipw_variance_zero_means_matches_aipw(self):
        # zeta = sigma^2 when mu = 0, so both variances are (s1+s2)^2 = 4
        assert ipw_variance(0.0, 0.0, 1.0, 1.0) == pytest.approx(aipw_variance(1.0, 1.0))
        assert ipw_variance(0.0, 0.0, 1.0, 1.0) == pytest.approx(4.0)

    def test_ipw_variance_unit_means(self):
        # zeta = 2 for both arms: (s1+s2) * (2/1 + 2/1) = 8, twice the AIPW
        # variance, so the IPW rate is half the AIPW rate
        assert ipw_variance(1.0, 1.0, 1.0, 1.0) == pytest.approx(8.0)
        # at mu2 = 0.99 the zeta terms shift a touch, so only roughly half
        assert ipw_rate(1.0, 0.99, 1.0, 1.0) == pytest.approx(
            lower_bound_rate(0.01, 1.0, 1.0) / 2.0, rel=1e-2
        )

    def test_ipw_variance_large_means(self):
        # zeta = 101 for both arms: (s1+s2) * (101 + 101) = 404 vs aipw 4
        assert ipw_variance(10.0, 10.0, 1.0, 1.0) == pytest.approx(404.0)

    @given(mean_val, mean_val, pos_sigma, pos_sigma)
    def test_ipw_never_beats_lower_bound(self, m1, m2, s1, s2):
        delta = m1 - m2
        assert ipw_rate(m1, m2, s1, s2) <= lower_bound_rate(delta, s1, s2) + 1e-15

    @given(pos_sigma, pos_sigma)
    def test_variance_identity(self, s1, s2):
        # (s1+s2)^2 equals the w*-weighted inverse-allocation sum
        w1, w2 = target_allocation(s1, s2)
        direct = s1 * s1 / w1 + s2 * s2 / w2
        assert aipw_variance(s1, s2) == pytest.approx(direct, rel=1e-12)


class TestNormalizedScore:
    def test_centered(self):
        assert normalized_score(1.5, 1.0, 0.5, 4.0) == 0.0
        assert normalized_score(1.2, 1.0, 0.2, 4.0) == pytest.approx(0.0, abs=1e-15)

    def test_unit(self):
        assert normalized_score(3.0, 1.0, 0.0, 4.0) == 1.0

    def test_arithmetic(self):
        assert normalized_score(0.0, 2.0, -2.0, 4.0) == 0.0

    def test_rejects_nonpositive_variance(self):
        with pytest.raises(NonPositiveVarianceError):
            normalized_score(1.0, 0.0, 0.2, 0.0)


class TestOracleExactError:
    def test_known_value(self):
        assert oracle_exact_error(0.1, 1.0, 1.0, 400) == pytest.approx(0.15865525393145707, rel=1e-12)

    def test_tiny_gap_approaches_half(self):
        assert oracle_exact_error(1e-12, 1.0, 1.0, 100) == pytest.approx(0.5, abs=1e-6)

    def test_vanishes_with_horizon(self):
        assert oracle_exact_error(0.2, 1.0, 1.0, 10_000_000) < 1e-12

    def test_monotone_in_horizon(self):
        errs = [oracle_exact_error(0.1, 1.0, 1.0, t) for t in (100, 400, 1600)]
        assert errs[0] > errs[1] > errs[2]

    def test_rejects_zero_gap(self):
        with pytest.raises(ValidationError):
            oracle_exact_error(0.0, 1.0, 1.0, 100)

    def test_exact_rate_approaches_bound_from_above(self):
        # -log Phi(-x) = x^2/2 + log(x sqrt(2 pi)) + o(1), so -log p / T sits
        # above delta^2 / (2 (s1+s2)^2) by a log(T)/T excess that decays to 0
        delta, s1, s2 = 0.1, 1.0, 1.0
        bound = lower_bound_rate(delta, s1, s2)
        rates = [
            -math.log(oracle_exact_error(delta, s1, s2, t)) / t
            for t in (10_000, 100_000, 250_000)
        ]
        assert all(r > bound for r in rates)
        assert rates[0] > rates[1] > rates[2]
        assert rates[2] <= 1.02 * bound


class TestRateReport:
    def test_fields_consistent(self):
        rep = rate_report(1.0, 0.8, 1.0, 3.0)
        assert rep.delta == pytest.approx(0.2)
        assert (rep.w1, rep.w2) == target_allocation(1.0, 3.0)
        assert rep.v_aipw == pytest.approx(16.0)
        assert rep.rate_lower_bound == pytest.approx(0.04 / 32.0)
        assert rep.rate_ipw == pytest.approx(rep.delta**2 / (2 * rep.v_ipw))
        assert rep.zeta1 == pytest.approx(2.0)
        assert rep.zeta2 == pytest.approx(9.64)
