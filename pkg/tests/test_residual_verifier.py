import math
from dataclasses import replace

import numpy as np
import pytest

from config import VerifierConfig
from core.asymptotics import RescaledProfile
from core.errors import InvalidInput
from core.kernels import KernelSpec
from core.residual_verifier import (
    ResidualReport,
    SymmetrisedCheck,
    condensed_residual,
    default_sample_points,
    symmetrised_difference_check,
    toy_residual,
    verify_profile,
)
from core.wave_solver import WaveFamily


class TestToyEquation:

    @pytest.mark.parametrize("s, x", [(0.5, 1.0), (0.3, 0.5), (0.7, 4.0)])
    def test_explicit_solution(self, s, x):
        report = toy_residual(s, x)
        assert report.passed
        assert report.relative < 1e-7

    def test_homogeneity(self):
        s = 0.4
        one = toy_residual(s, 1.0)
        two = toy_residual(s, 2.0)
        assert two.rhs == pytest.approx(2.0 ** (2 * s) * one.rhs, rel=1e-8)

    def test_arguments(self):
        with pytest.raises(InvalidInput):
            toy_residual(1.0, 1.0)
        with pytest.raises(InvalidInput):
            toy_residual(0.5, 0.0)


class TestReports:

    def test_zero_residual_without_amplitude(self):
        report = ResidualReport(x=0.1, u=0.0, lhs=0.0, rhs=0.0, tail_bound=0.0, quad_error=0.0, threshold=1e-4)
        assert report.relative == 0.0
        assert report.passed

    def test_relative_scale(self):
        report = ResidualReport(x=0.1, u=0.5, lhs=0.25, rhs=0.2499, tail_bound=0.0, quad_error=0.0, threshold=1e-4)
        assert report.relative == pytest.approx(4e-4)
        assert not report.passed
        data = report.to_dict()
        assert data["passed"] is False
        assert data["residual"] == pytest.approx(1e-4)

    def test_tail_bound_counts_against_budget(self):
        report = ResidualReport(x=0.1, u=1.0, lhs=1.0, rhs=1.0, tail_bound=1e-3, quad_error=0.0, threshold=1e-4)
        assert report.relative == 0.0
        assert not report.passed

    def test_symmetrised_relative(self):
        assert SymmetrisedCheck(1.0, 0.1, 0.0, 0.0).relative == 0.0
        assert SymmetrisedCheck(1.0, 0.1, 2.0, 1.0).relative == pytest.approx(0.5)

    def test_sample_points(self):
        np.testing.assert_allclose(default_sample_points(2 * math.pi, 3), math.pi * np.array([1, 2, 3]) / 4)


def test_vanishing_profile_has_zero_residual():
    r = RescaledProfile(
        family=WaveFamily.WHITHAM,
        period=2 * math.pi,
        speed_c=1.0,
        u_modes=np.zeros(17),
        linear=0.0,
        quadratic=1.0,
        cubic=0.0,
        kernel=KernelSpec.whitham(),
    )
    report = condensed_residual(r, 1.0)
    assert report.residual == 0.0
    assert report.relative == 0.0
    assert report.passed


class TestSolverProfiles:

    def test_bidirectional_profile_satisfies_condensed_equation(self, bidirectional_rescaled):
        r = bidirectional_rescaled
        reports = verify_profile(r, xs=[0.25 * r.period, 0.4 * r.period], cfg=VerifierConfig(threshold=1e-3))
        assert len(reports) == 2
        for report in reports:
            assert report.u > 0
            assert report.quad_error < 1e-6
            assert report.relative < 1e-3

    def test_whitham_profile_satisfies_condensed_equation(self, whitham_rescaled):
        report = condensed_residual(whitham_rescaled, 0.25 * whitham_rescaled.period)
        assert report.relative < 1e-3
        assert report.tail_bound < 1e-8

    def test_residual_is_affine_in_amplitude(self, bidirectional_rescaled):
        r = bidirectional_rescaled
        x = 0.3 * r.period
        base = condensed_residual(r, x)
        scaled = condensed_residual(replace(r, u_modes=1.01 * r.u_modes), x)
        u = base.u
        expected = 0.0101 * r.quadratic * u ** 2 + (1.01 ** 3 - 1.01) * r.cubic * u ** 3
        assert scaled.residual - 1.01 * base.residual == pytest.approx(expected, abs=1e-7 * abs(base.rhs) + 1e-12)

    def test_symmetrised_identity(self, bidirectional_rescaled):
        r = bidirectional_rescaled
        x, h = 1.0, 0.25
        check = symmetrised_difference_check(r, x, h)
        plus = condensed_residual(r, x + h)
        minus = condensed_residual(r, x - h)
        assert check.lhs == pytest.approx(plus.lhs - minus.lhs, rel=1e-12)
        assert check.rhs == pytest.approx(plus.rhs - minus.rhs, rel=1e-5, abs=1e-8)

    def test_invalid_points(self, bidirectional_rescaled):
        r = bidirectional_rescaled
        with pytest.raises(InvalidInput):
            condensed_residual(r, 0.0)
        with pytest.raises(InvalidInput):
            condensed_residual(r, 0.5 * r.period)
        with pytest.raises(InvalidInput):
            symmetrised_difference_check(r, 0.5, 0.5)
        with pytest.raises(InvalidInput):
            symmetrised_difference_check(r, 3.0, 0.2)
        with pytest.raises(InvalidInput):
            verify_profile(r, xs=[])
