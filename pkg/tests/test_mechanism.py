import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dpsynth import (
    PrivacyParams,
    laplace_sample,
    laplace_vector,
    perturb,
    privacy_check,
    sensitivity_bound,
    sigma_for,
)


class TestLaplaceSampling:
    def test_determinism(self):
        a = laplace_vector(0.5, 100, np.random.default_rng(42))
        b = laplace_vector(0.5, 100, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_shape_argument(self):
        draws = laplace_vector(1.0, (3, 4), np.random.default_rng(0))
        assert draws.shape == (3, 4)

    def test_scaling_is_exact(self):
        # the inverse-CDF construction is linear in sigma, so doubling the
        # scale doubles every draw bit for bit
        base = laplace_vector(0.25, 1000, np.random.default_rng(7))
        doubled = laplace_vector(0.5, 1000, np.random.default_rng(7))
        assert np.array_equal(doubled, 2.0 * base)

    def test_tail_mass(self):
        # P(|lam| > sigma * t) = exp(-t); 10^5 draws put the empirical rate
        # within 3 binomial standard errors
        draws = laplace_vector(2.0, 100_000, np.random.default_rng(123))
        for t in (0.5, 1.0, 2.0):
            p = math.exp(-t)
            observed = np.mean(np.abs(draws) > 2.0 * t)
            se = math.sqrt(p * (1 - p) / len(draws))
            assert abs(observed - p) <= 3 * se

    def test_symmetry(self):
        draws = laplace_vector(1.0, 200_000, np.random.default_rng(8))
        assert abs(np.mean(draws < 0) - 0.5) < 0.01
        assert abs(np.median(draws)) < 0.02

    def test_sigma_validation(self):
        with pytest.raises(ValueError, match="sigma must be positive"):
            laplace_vector(0.0, 10, np.random.default_rng(0))

    def test_single_sample(self):
        value = laplace_sample(1.0, np.random.default_rng(3))
        assert isinstance(value, float)
        assert math.isfinite(value)

    def test_all_draws_finite(self):
        draws = laplace_vector(1e-6, 100_000, np.random.default_rng(9))
        assert np.isfinite(draws).all()


class TestSensitivity:
    def test_values(self):
        assert sensitivity_bound(56, 10_000) == pytest.approx(0.0112, rel=1e-15)
        assert sensitivity_bound(1, 2) == 1.0

    def test_validation(self):
        with pytest.raises(ValueError, match="family size"):
            sensitivity_bound(0, 10)
        with pytest.raises(ValueError, match="dataset size"):
            sensitivity_bound(3, 0)


class TestSigmaFor:
    def test_frozen_values(self):
        # delta / ln(|F|/gamma), evaluated independently
        assert sigma_for(0.1, 56, 0.01) == pytest.approx(
            0.011586784835075014, rel=1e-12
        )
        assert sigma_for(0.2, 17, 0.1) == pytest.approx(
            0.03894233826568741, rel=1e-12
        )

    def test_monotone_in_delta(self):
        assert sigma_for(0.2, 10, 0.1) == 2 * sigma_for(0.1, 10, 0.1)

    def test_validation(self):
        with pytest.raises(ValueError, match="delta_target must be positive"):
            sigma_for(0.0, 10, 0.1)
        with pytest.raises(ValueError, match="family size"):
            sigma_for(0.1, 0, 0.1)
        with pytest.raises(ValueError, match="gamma must lie"):
            sigma_for(0.1, 10, 1.0)


class TestPrivacyCheck:
    def test_frozen_threshold(self):
        # 2 * 56 * ln(56/0.01) / (1 * 0.1), evaluated independently
        check = privacy_check(10_000, 1.0, 0.1, 56, 0.01)
        assert check.required_n == pytest.approx(9666.184501930029, rel=1e-12)
        assert check.passed
        assert not privacy_check(9_000, 1.0, 0.1, 56, 0.01).passed

    def test_epsilon_validation(self):
        with pytest.raises(ValueError, match="epsilon must be positive"):
            privacy_check(100, 0.0, 0.1, 10, 0.1)

    def test_report_text(self):
        check = privacy_check(10_000, 1.0, 0.1, 56, 0.01)
        text = check.report_text()
        assert "sigma = 0.0115867848\n" in text
        assert "epsilon = 1\n" in text
        assert "required_n = 9666.1845\n" in text

    @given(
        n=st.integers(min_value=1, max_value=10**7),
        epsilon=st.floats(min_value=1e-3, max_value=10.0),
        delta=st.floats(min_value=1e-3, max_value=0.5),
        family_size=st.integers(min_value=1, max_value=10**4),
        gamma=st.floats(min_value=1e-4, max_value=0.24),
    )
    @settings(max_examples=200, deadline=None)
    def test_gate_equivalent_to_noise_ratio(self, n, epsilon, delta, family_size, gamma):
        # passing the size gate is the same statement as the noise ratio
        # sensitivity/sigma staying at or below epsilon
        check = privacy_check(n, epsilon, delta, family_size, gamma)
        assume(abs(n - check.required_n) > 1e-6 * max(1.0, check.required_n))
        ratio_ok = sensitivity_bound(family_size, n) / sigma_for(delta, family_size, gamma) <= epsilon
        assert check.passed == ratio_ok


class TestPerturb:
    def test_matches_direct_noise(self):
        stats = np.array([0.2, 0.4, 0.6])
        noisy = perturb(stats, 0.3, np.random.default_rng(77))
        noise = laplace_vector(0.3, 3, np.random.default_rng(77))
        assert np.array_equal(noisy, stats + noise)

    def test_no_clipping(self):
        stats = np.ones(2000)
        noisy = perturb(stats, 5.0, np.random.default_rng(5))
        assert (noisy > 1.0).any()
        assert (noisy < -1.0).any()

    def test_preserves_length(self):
        noisy = perturb(np.zeros(7), 1.0, np.random.default_rng(1))
        assert noisy.shape == (7,)


class TestPrivacyParams:
    def test_derive_without_epsilon_reports_achieved(self):
        params = PrivacyParams.derive(0.1, 0.01, 56, 10_000)
        assert params.sigma == pytest.approx(0.011586784835075014, rel=1e-12)
        assert params.epsilon == params.achieved_epsilon
        assert params.achieved_epsilon == pytest.approx(
            sensitivity_bound(56, 10_000) / params.sigma, rel=1e-15
        )

    def test_derive_with_epsilon(self):
        params = PrivacyParams.derive(0.1, 0.01, 56, 10_000, epsilon=1.0)
        assert params.epsilon == 1.0
        assert params.achieved_epsilon < 1.0

    def test_accuracy_range(self):
        ok = PrivacyParams.derive(0.5, 0.2, 10, 100)
        assert ok.in_accuracy_range()
        wide_delta = PrivacyParams.derive(0.51, 0.2, 10, 100)
        assert not wide_delta.in_accuracy_range()
        wide_gamma = PrivacyParams.derive(0.5, 0.25, 10, 100)
        assert not wide_gamma.in_accuracy_range()

    def test_validation(self):
        with pytest.raises(ValueError, match="sigma must be positive"):
            PrivacyParams(1.0, 0.1, 0.1, 0.0, 10, 100)
        with pytest.raises(ValueError, match="gamma must lie"):
            PrivacyParams(1.0, 0.1, 1.5, 0.1, 10, 100)
