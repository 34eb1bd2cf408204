import numpy as np
import pytest

from utils.extrapolation import limit, limit_coeffs, richardson_limit


def test_limit_recovers_quadratic_model():
    eps = np.linspace(0.01, 0.2, 20)
    value, misfit = limit(eps, 2.0 + 3.0 * eps - eps ** 2)
    assert value == pytest.approx(2.0, abs=1e-12)
    assert misfit < 1e-12


def test_limit_coeffs_returns_all_terms():
    eps = np.geomspace(1e-3, 1e-1, 12)
    coeffs, _ = limit_coeffs(eps, 1.0 + 0.5 * eps, n_terms=2)
    np.testing.assert_allclose(coeffs, [1.0, 0.5], atol=1e-12)


def test_limit_rejects_short_input():
    with pytest.raises(ValueError):
        limit([0.1, 0.2], [1.0, 1.0], n_terms=3)
    with pytest.raises(ValueError):
        limit([0.1, 0.2, 0.3], [1.0, 1.0])


def test_richardson_removes_polynomial_error():
    steps = [1.0, 0.5, 0.25]
    values = [1.0 + h + h * h for h in steps]
    assert richardson_limit(2.0, values) == pytest.approx(1.0, abs=1e-13)


def test_richardson_single_value():
    assert richardson_limit(2.0, [3.5]) == 3.5
