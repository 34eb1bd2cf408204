import math

import numpy as np
import pytest

from core.errors import DomainError, InvalidInput
from core.kernels import (
    KernelFamily,
    KernelSpec,
    SingularKind,
    antiderivative_K,
    decompose,
    kernel_bidirectional_closed,
    kernel_derivative,
    kernel_evaluator,
    kernel_numeric_from_symbol,
    kernel_table,
    kernel_value,
    kernel_whitham_series,
    normalized_kernel,
    periodized_fourier_coefficients,
    regular_part,
    regular_second_derivative,
    remainder_bound_check,
    run_kernel_suite,
    second_difference,
    singular_part,
    symbol,
    tail_bound_check,
    whitham_pair_terms,
)

WHITHAM = KernelSpec.whitham()
BIDIRECTIONAL = KernelSpec.bidirectional()
SMOOTH_SPECS = [WHITHAM, BIDIRECTIONAL]


class TestSymbols:

    def test_values_at_origin_and_one(self):
        assert symbol(WHITHAM, 0.0) == 1.0
        assert symbol(BIDIRECTIONAL, 0.0) == 1.0
        assert symbol(BIDIRECTIONAL, 1.0) == pytest.approx(math.tanh(1.0), rel=1e-15)
        assert symbol(WHITHAM, 1.0) == pytest.approx(math.sqrt(math.tanh(1.0)), rel=1e-15)

    def test_small_frequency_branch_is_continuous(self):
        xi = np.array([0.99e-4, 1.01e-4])
        np.testing.assert_allclose(symbol(BIDIRECTIONAL, xi), np.tanh(xi) / xi, rtol=1e-14)

    def test_whitham_symbol_squares_to_bidirectional(self):
        xi = np.linspace(0.0, 30.0, 61)
        np.testing.assert_allclose(symbol(WHITHAM, xi) ** 2, symbol(BIDIRECTIONAL, xi), rtol=1e-14)

    def test_pure_homogeneous_symbol(self):
        # 2Γ(1/2)cos(π/4) = √(2π)
        assert symbol(KernelSpec.homogeneous(0.5), 4.0) == pytest.approx(math.sqrt(2 * math.pi) / 2, rel=1e-14)
        with pytest.raises(DomainError):
            symbol(KernelSpec.logarithmic(), 0.0)

    def test_periodized_coefficients(self):
        coeffs = periodized_fourier_coefficients(BIDIRECTIONAL, 2 * math.pi, 16)
        assert coeffs.shape == (17,)
        assert coeffs[0] == 1.0
        assert coeffs[1] == pytest.approx(math.tanh(1.0))
        assert np.all(np.diff(coeffs) < 0)
        with pytest.raises(InvalidInput):
            periodized_fourier_coefficients(KernelSpec.homogeneous(), 2 * math.pi, 16)
        with pytest.raises(InvalidInput):
            periodized_fourier_coefficients(WHITHAM, 2 * math.pi, 2)


class TestEvaluation:

    @pytest.mark.parametrize("x", [0.1, 0.5, 2.0, 5.0])
    def test_whitham_series_matches_inverse_transform(self, x):
        numeric = kernel_numeric_from_symbol(WHITHAM, x)
        assert kernel_value(WHITHAM, x) == pytest.approx(numeric, rel=1e-6)

    @pytest.mark.parametrize("x", [0.1, 0.5, 2.0, 5.0])
    def test_bidirectional_closed_matches_inverse_transform(self, x):
        numeric = kernel_numeric_from_symbol(BIDIRECTIONAL, x)
        assert kernel_bidirectional_closed(x) == pytest.approx(numeric, rel=1e-6)

    def test_partial_sums_approach_accelerated_value(self):
        x = 0.7
        target = kernel_value(WHITHAM, x)
        coarse = abs(kernel_whitham_series(x, 64) - target)
        fine = abs(kernel_whitham_series(x, 1024) - target)
        assert fine < coarse
        assert kernel_whitham_series(x, 1) == pytest.approx((2 * math.pi * x) ** -0.5)

    def test_pair_terms_sum_to_partial_sum(self):
        x = np.array([0.3, 1.7])
        terms = whitham_pair_terms(x, 50)
        leading = (2 * math.pi * x) ** -0.5
        np.testing.assert_allclose(leading + terms.sum(axis=0), kernel_whitham_series(x, 51), rtol=1e-12)

    def test_bidirectional_log_limit(self):
        x = 1e-5
        assert normalized_kernel(BIDIRECTIONAL, x) - math.log(1 / x) == pytest.approx(math.log(4 / math.pi), abs=1e-8)

    @pytest.mark.parametrize("spec", SMOOTH_SPECS, ids=lambda s: s.family.value)
    def test_even(self, spec):
        x = np.array([0.2, 1.0, 3.5])
        np.testing.assert_allclose(kernel_value(spec, -x), kernel_value(spec, x), rtol=1e-13)

    @pytest.mark.parametrize("spec", SMOOTH_SPECS, ids=lambda s: s.family.value)
    def test_positive_decreasing_convex(self, spec, rng):
        x = np.sort(rng.uniform(0.05, 4.0, 40))
        values = kernel_value(spec, x)
        assert np.all(values > 0)
        assert np.all(np.diff(values) < 0)
        assert np.all(kernel_derivative(spec, x, 2) > 0)
        shift = rng.uniform(0.01, 1.0, 40)
        y = x + shift + 1e-3
        assert np.all(second_difference(kernel_evaluator(spec), shift, y) > 0)

    @pytest.mark.parametrize("spec", SMOOTH_SPECS, ids=lambda s: s.family.value)
    def test_derivative_matches_finite_difference(self, spec):
        x, h = 1.3, 1e-3
        numeric = (kernel_value(spec, x + h) - kernel_value(spec, x - h)) / (2 * h)
        assert kernel_derivative(spec, x) == pytest.approx(numeric, rel=1e-5)

    @pytest.mark.parametrize("spec", SMOOTH_SPECS, ids=lambda s: s.family.value)
    def test_floor(self, spec):
        with pytest.raises(DomainError):
            kernel_value(spec, 0.0)
        with pytest.raises(DomainError):
            normalized_kernel(spec, np.array([1.0, 1e-13]))

    def test_far_field_is_zero(self):
        assert normalized_kernel(WHITHAM, 50.0) == 0.0
        assert 0 < kernel_value(BIDIRECTIONAL, 50.0) < 1e-30

    def test_second_difference_at_zero_shift(self):
        diff = second_difference(kernel_evaluator(BIDIRECTIONAL), 0.0, np.array([1.0, 2.0]))
        np.testing.assert_array_equal(diff, [0.0, 0.0])

    def test_integral_over_half_line(self):
        assert antiderivative_K(BIDIRECTIONAL, math.inf) == pytest.approx(0.5, rel=1e-8)
        assert antiderivative_K(WHITHAM, math.inf) == pytest.approx(0.5, rel=1e-7)
        assert antiderivative_K(KernelSpec.homogeneous(0.25), 16.0) == pytest.approx(8.0)
        with pytest.raises(InvalidInput):
            antiderivative_K(WHITHAM, -1.0)

    def test_invalid_requests(self):
        with pytest.raises(InvalidInput):
            kernel_derivative(WHITHAM, 1.0, order=3)
        with pytest.raises(InvalidInput):
            KernelSpec(KernelFamily.WHITHAM, scale=0.0)
        with pytest.raises(InvalidInput):
            KernelSpec.homogeneous(1.0)


class TestDecomposition:

    @pytest.mark.parametrize("spec", SMOOTH_SPECS, ids=lambda s: s.family.value)
    def test_parts_add_up(self, spec):
        x = np.array([0.01, 0.3, 1.0, 4.0, 45.0])
        np.testing.assert_allclose(singular_part(spec, x) + regular_part(spec, x),
                                   normalized_kernel(spec, x), rtol=1e-12, atol=1e-14)

    def test_singular_kinds(self):
        assert decompose(WHITHAM).singular_kind == SingularKind.HOMOGENEOUS
        assert decompose(BIDIRECTIONAL).singular_kind == SingularKind.LOGARITHMIC
        assert singular_part(WHITHAM, 4.0) == pytest.approx(0.5)

    def test_bidirectional_regular_at_origin(self):
        assert regular_part(BIDIRECTIONAL, 0.0) == pytest.approx(math.log(4 / math.pi), rel=1e-14)
        assert regular_second_derivative(BIDIRECTIONAL, 0.0) == pytest.approx((math.pi / 4) ** 2 * 2 / 3)

    def test_bidirectional_regular_second_derivative(self):
        x, h = 1.0, 1e-3
        numeric = (regular_part(BIDIRECTIONAL, x + h) + regular_part(BIDIRECTIONAL, x - h)
                   - 2 * regular_part(BIDIRECTIONAL, x)) / h ** 2
        assert regular_second_derivative(BIDIRECTIONAL, x) == pytest.approx(numeric, rel=1e-5)

    def test_regular_l1_is_cached(self):
        first = decompose(BIDIRECTIONAL).regular_second_derivative_l1
        second = decompose(BIDIRECTIONAL).regular_second_derivative_l1
        assert first == second > 0
        assert decompose(KernelSpec.logarithmic()).regular_second_derivative_l1 == 0.0


class TestBounds:

    @pytest.mark.parametrize("spec", SMOOTH_SPECS, ids=lambda s: s.family.value)
    @pytest.mark.parametrize("x, nu", [(0.05, 0.1), (0.2, 1.2), (0.5, 1.0)])
    def test_tail_bound(self, spec, x, nu):
        check = tail_bound_check(spec, x, nu)
        assert check.lhs >= -1e-12
        assert check.holds

    def test_tail_bound_pure_kernel(self):
        assert tail_bound_check(KernelSpec.logarithmic(), 0.1, 0.3).holds

    @pytest.mark.parametrize("spec", SMOOTH_SPECS, ids=lambda s: s.family.value)
    @pytest.mark.parametrize("x", [0.02, 0.3])
    def test_remainder_bound(self, spec, x):
        assert remainder_bound_check(spec, x).holds

    def test_bound_arguments(self):
        with pytest.raises(InvalidInput):
            tail_bound_check(WHITHAM, 0.5, 0.5)
        with pytest.raises(InvalidInput):
            remainder_bound_check(WHITHAM, 0.0)


def test_kernel_table_columns():
    table = kernel_table(BIDIRECTIONAL, np.geomspace(0.1, 5.0, 6))
    assert set(table) == {"x", "K_closed", "K_series", "K_numeric", "S", "R", "abs_err"}
    assert np.all(np.isnan(table["K_series"]))
    assert np.max(table["abs_err"]) < 1e-6


@pytest.mark.slow
def test_kernel_suite():
    reports = run_kernel_suite()
    assert all(report.passed for report in reports), [r.name for r in reports if not r.passed]
