import math

import numpy as np
import pytest

from core.errors import DomainError, InvalidInput
from core.quadrature import Singularity, integrate_panel
from core.special_functions import (
    HALF_PI,
    IdentityReport,
    b_bracket,
    b_closed,
    b_constant,
    beta_s,
    f_sigma,
    f_sigma_derivative,
    f_sigma_derivative_floor,
    f_sigma_lower_bound,
    gamma_fn,
    inequality_region,
    inequality_scan,
    lambda_fn,
    locate_homogeneous_threshold,
    min_weight_integral,
    moment_split,
    phi,
    phi_antiderivative,
    phi_s,
    psi_fn,
    run_identity_suite,
    symmetric_inequality_region,
    tau0,
    tau0_bracket,
    verify_beta_identity,
    verify_log_limits,
    verify_lower_bound_positivity,
    verify_moment_consistency,
    verify_phi_half_moment,
    verify_phi_zero_mass,
    verify_pv_integral,
    verify_upper_bound_identity,
    verify_zero_mass_split,
)


class TestEvaluators:

    def test_phi_matches_definition(self):
        t = np.array([0.25, 0.5, 1.5, 3.0, 50.0])
        direct = (t + 1) ** -0.5 + np.abs(t - 1) ** -0.5 - 2 * t ** -0.5
        np.testing.assert_allclose(phi(t), direct, rtol=1e-12)

    def test_phi_large_tau_has_no_cancellation(self):
        t = 1e6
        # Φ(τ) ~ (3/4)τ^{-5/2}
        assert phi(t) == pytest.approx(0.75 * t ** -2.5, rel=1e-6)

    def test_phi_is_even(self):
        np.testing.assert_allclose(phi(np.array([-0.3, -2.0])), phi(np.array([0.3, 2.0])))

    def test_phi_s_reduces_to_phi(self):
        assert phi_s(0.7, 0.5) == phi(0.7)

    def test_sign_structure(self):
        assert phi(0.3) < 0 < phi(0.9)
        assert phi(1.5) > 0
        assert lambda_fn(2.0) > 0
        assert psi_fn(0.5) == pytest.approx(math.log(3.0))
        assert gamma_fn(0.0) == pytest.approx(0.0, abs=1e-15)

    def test_lambda_definition(self):
        t = np.array([0.2, 0.7, 1.3, 10.0])
        np.testing.assert_allclose(lambda_fn(t), -np.log(np.abs(1 - 1 / t ** 2)), rtol=1e-12)

    def test_gamma_stable_branch(self):
        t = 1e4
        assert gamma_fn(t) == pytest.approx((t - 1) ** -0.5 - (t + 1) ** -0.5, rel=1e-6)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            phi(1.0)
        with pytest.raises(DomainError):
            phi(0.0)
        with pytest.raises(DomainError):
            psi_fn(1.0)
        with pytest.raises(DomainError):
            gamma_fn(-0.5)
        with pytest.raises(InvalidInput):
            phi_s(0.5, 0.0)

    def test_beta_values(self):
        assert beta_s(0.5) == pytest.approx(HALF_PI, rel=1e-15)
        assert beta_s(1.0) == pytest.approx(0.5, rel=1e-15)


class TestIdentities:

    def test_zero_mass(self):
        assert verify_phi_zero_mass().passed

    def test_half_moment(self):
        report = verify_phi_half_moment()
        assert report.passed
        assert report.computed == pytest.approx(HALF_PI, abs=1e-8)

    @pytest.mark.parametrize("s", [0.1, 0.3, 0.7, 0.9])
    def test_beta_identity(self, s):
        assert verify_beta_identity(s).passed

    def test_beta_identity_rejects_endpoints(self):
        with pytest.raises(InvalidInput):
            verify_beta_identity(1.0)

    def test_pv_integral(self):
        report = verify_pv_integral()
        assert report.passed
        assert report.computed == pytest.approx(math.pi, abs=1e-8)

    def test_moment_split(self):
        assert verify_moment_consistency().passed
        assert verify_zero_mass_split().passed
        inner, outer = moment_split()
        assert inner == pytest.approx(-b_constant(), abs=1e-10)
        assert inner + outer == pytest.approx(HALF_PI, abs=1e-8)

    def test_lower_bound_positivity(self):
        assert all(report.passed for report in verify_lower_bound_positivity())


class TestConstants:

    def test_tau0_bracket(self):
        lo, hi = tau0_bracket()
        assert 0.5 < lo < hi < 2.0 / 3.0
        assert hi - lo <= 1e-12
        assert abs(phi(tau0())) < 1e-10

    def test_b_bracket(self):
        lo, hi = b_bracket()
        assert 0.5 < lo <= b_constant() <= hi < 0.6

    def test_b_closed_matches_quadrature(self):
        t = 0.4
        integral = integrate_panel(lambda x: phi(x) * np.sqrt(x), 0.0, t, [Singularity.algebraic(0.0, 0.5)])
        assert b_closed(t) == pytest.approx(-integral.value, rel=1e-9)

    def test_antiderivative(self):
        integral = integrate_panel(phi, 0.2, 0.6).value
        assert phi_antiderivative(0.6) - phi_antiderivative(0.2) == pytest.approx(integral, rel=1e-9)

    def test_upper_bound_identity(self):
        assert verify_upper_bound_identity(2.0 / 3.0).passed
        assert verify_upper_bound_identity(0.3).passed

    def test_f_at_reference_points(self):
        assert f_sigma(1.0) == pytest.approx(0.0, abs=1e-9)
        assert f_sigma(2.0) >= (math.pi - 3.0) / 4.0

    def test_f_positive_and_above_lower_bound(self):
        sigmas = np.geomspace(1.05, 100.0, 25)
        values = np.array([f_sigma(s) for s in sigmas])
        assert np.all(values > 0)
        assert np.all(values >= f_sigma_lower_bound(sigmas) - 1e-12)

    def test_f_derivative(self):
        sigma = 3.0
        h = 1e-4
        numeric = (f_sigma(sigma + h) - f_sigma(sigma - h)) / (2 * h)
        assert f_sigma_derivative(sigma) == pytest.approx(numeric, rel=1e-4)
        grid = np.geomspace(1.5, 90.0, 30)
        assert np.all(f_sigma_derivative(grid) > f_sigma_derivative_floor(grid))

    def test_f_derivative_domain(self):
        with pytest.raises(InvalidInput):
            f_sigma_derivative(1.2)
        with pytest.raises(InvalidInput):
            f_sigma(0.5)

    @pytest.mark.parametrize("sigma", [0.5, 1.2, 3.0, 40.0])
    def test_min_weight_integral_closed_form(self, sigma):
        t0 = tau0()
        kink = sigma ** -2
        breakpoints = [kink] if kink < t0 else []
        integral = integrate_panel(
            lambda t: phi(t) * np.minimum(1.0, sigma * np.sqrt(t)),
            0.0, t0, [Singularity.algebraic(0.0, 0.5)], breakpoints=breakpoints,
        )
        assert min_weight_integral(sigma) == pytest.approx(integral.value, rel=1e-9, abs=1e-12)


class TestInequalities:

    def test_equality_at_half_pi(self):
        result = inequality_region(HALF_PI, HALF_PI)
        assert result.satisfies_both
        assert result.upper_margin == pytest.approx(0.0, abs=1e-8)
        assert result.lower_margin == pytest.approx(0.0, abs=1e-8)

    def test_off_target_pair_fails(self):
        assert not inequality_region(1.0, 2.5).satisfies_both

    def test_pair_validation(self):
        with pytest.raises(InvalidInput):
            inequality_region(2.0, 1.0)
        with pytest.raises(InvalidInput):
            symmetric_inequality_region(0.0, 1.0)

    def test_refined_scan_concentrates_at_target(self):
        scan = inequality_scan(resolution=120)
        assert len(scan.solutions) >= 1
        assert scan.max_distance < 0.1
        symmetric = inequality_scan(resolution=120, symmetric=True)
        assert len(symmetric.solutions) > len(scan.solutions)
        assert symmetric.max_distance > scan.max_distance

    @pytest.mark.slow
    def test_full_resolution_scan(self):
        scan = inequality_scan(resolution=400)
        assert scan.max_distance <= 1e-2


class TestIdentityReport:

    def test_scalar_and_interval(self):
        assert IdentityReport("a", 1.0, 1.0 + 1e-9, 1e-8).passed
        assert not IdentityReport("a", 1.0, 1.1, 1e-8).passed
        inside = IdentityReport("b", 0.55, (0.5, 0.6))
        assert inside.passed and inside.deviation == 0.0
        outside = IdentityReport("b", 0.65, (0.5, 0.6))
        assert not outside.passed
        assert outside.deviation == pytest.approx(0.05)

    def test_dict_maps_infinity(self):
        report = IdentityReport("c", 2.0, (0.0, math.inf), note="x")
        data = report.to_dict()
        assert data["expected"] == [0.0, None]
        restored = IdentityReport.from_dict(data)
        assert restored.expected == (0.0, math.inf)
        assert restored.passed


@pytest.mark.slow
def test_log_limits():
    reports = verify_log_limits()
    assert len(reports) == 4
    assert all(report.passed for report in reports), [r.to_dict() for r in reports if not r.passed]


@pytest.mark.slow
def test_identity_suite():
    reports = run_identity_suite()
    failed = [r.name for r in reports if not r.passed]
    assert not failed


@pytest.mark.slow
def test_homogeneous_threshold_scan():
    threshold, minima = locate_homogeneous_threshold()
    assert 0.2 <= threshold <= 0.5
    assert minima[0.5] > 0
