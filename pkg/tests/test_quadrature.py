import math

import numpy as np
import pytest

from config import QuadratureConfig
from core.errors import InvalidDecay, InvalidRange, NonConvergent
from core.quadrature import Singularity, integrate_panel, integrate_tail
from core.special_functions import lambda_fn


def test_algebraic_endpoint_singularity():
    result = integrate_panel(lambda t: t ** -0.5, 0.0, 1.0, [Singularity.algebraic(0.0, 0.5)])
    assert result.value == pytest.approx(2.0, rel=1e-12)
    assert result.error < 1e-9


def test_logarithmic_endpoint_singularity():
    result = integrate_panel(np.log, 0.0, 1.0, [Singularity.logarithmic(0.0)])
    assert result.value == pytest.approx(-1.0, rel=1e-11)


def test_interior_singularity_is_split():
    result = integrate_panel(lambda t: np.abs(t) ** -0.5, -1.0, 1.0, [Singularity.algebraic(0.0, 0.5)])
    assert result.value == pytest.approx(4.0, rel=1e-12)


def test_singularity_at_both_ends():
    # ∫_0^1 t^{-1/2}(1-t)^{-1/2} = π
    f = lambda t: 1.0 / np.sqrt(t * (1.0 - t))
    sings = [Singularity.algebraic(0.0, 0.5), Singularity.algebraic(1.0, 0.5)]
    assert integrate_panel(f, 0.0, 1.0, sings).value == pytest.approx(math.pi, rel=1e-12)


def test_power_law_tail():
    assert integrate_tail(lambda t: t ** -2.0, 1.0, 2.0).value == pytest.approx(1.0, rel=1e-10)
    assert integrate_tail(lambda t: t ** -2.5, 1.0, 2.5).value == pytest.approx(1.0 / 1.5, rel=1e-10)


def test_linearity():
    f = lambda t: np.log(t) * np.cos(t)
    g = lambda t: np.sqrt(t)
    sing = [Singularity.logarithmic(0.0)]
    combined = integrate_panel(lambda t: 2.0 * f(t) + 3.0 * g(t), 0.0, 2.0, sing).value
    separate = 2.0 * integrate_panel(f, 0.0, 2.0, sing).value + 3.0 * integrate_panel(g, 0.0, 2.0, sing).value
    assert combined == pytest.approx(separate, rel=1e-11)


def test_tighter_tolerance_uses_more_panels():
    f = lambda t: np.sin(1.0 / (t + 0.05))
    loose = integrate_panel(f, 0.0, 1.0, cfg=QuadratureConfig(rel_tol=1e-4))
    tight = integrate_panel(f, 0.0, 1.0, cfg=QuadratureConfig(rel_tol=1e-12))
    assert tight.panels >= loose.panels


def test_breakpoints_do_not_change_value():
    f = lambda t: np.abs(t - 0.3)
    plain = integrate_panel(f, 0.0, 1.0).value
    split = integrate_panel(f, 0.0, 1.0, breakpoints=[0.3]).value
    assert split == pytest.approx(0.045 + 0.245, rel=1e-13)
    assert plain == pytest.approx(split, rel=1e-9)


def test_invalid_range():
    with pytest.raises(InvalidRange):
        integrate_panel(np.cos, 1.0, 1.0)
    with pytest.raises(InvalidRange):
        integrate_panel(np.cos, 0.0, 1.0, [Singularity.algebraic(2.0, 0.5)])
    with pytest.raises(InvalidRange):
        integrate_tail(lambda t: t ** -2.0, 0.0)


def test_invalid_decay():
    with pytest.raises(InvalidDecay):
        integrate_tail(lambda t: 1.0 / t, 1.0, 1.0)


def test_singularity_validation():
    with pytest.raises(ValueError):
        Singularity.algebraic(0.0, 1.5)


def _model_integral(c: float, s: float) -> float:
    """∫_0^1 |τ-c|^{s-1} dτ"""
    return (c ** s + (1.0 - c) ** s) / s


def _weighted_model_integral(c: float, s: float) -> float:
    """∫_0^1 |τ-c|^{s-1}(1+τ²) dτ"""
    left, right = c, 1.0 - c
    return ((1.0 + c * c) * (left ** s + right ** s) / s
            + 2.0 * c * (right ** (s + 1.0) - left ** (s + 1.0)) / (s + 1.0)
            + (left ** (s + 2.0) + right ** (s + 2.0)) / (s + 2.0))


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("c", [0.0, 0.5, 1.0])
class TestAlgebraicModel:
    def test_value_within_tolerance(self, c, s):
        exact = _model_integral(c, s)
        result = integrate_panel(lambda t: np.abs(t - c) ** (s - 1.0), 0.0, 1.0, [Singularity.algebraic(c, s)])
        assert abs(result.value - exact) <= 1e-10 * exact
        assert result.error <= 1e-10 * exact

    def test_tight_tolerance(self, c, s):
        exact = _model_integral(c, s)
        cfg = QuadratureConfig(rel_tol=1e-12)
        result = integrate_panel(lambda t: np.abs(t - c) ** (s - 1.0), 0.0, 1.0, [Singularity.algebraic(c, s)], cfg)
        assert result.value == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("rel_tol", [5e-11, 2.5e-11, 1e-12])
def test_strong_singularity_at_tight_tolerance(rel_tol):
    f = lambda t: np.abs(t - 0.5) ** -0.7
    result = integrate_panel(f, 0.0, 1.0, [Singularity.algebraic(0.5, 0.3)], QuadratureConfig(rel_tol=rel_tol))
    exact = _model_integral(0.5, 0.3)
    assert abs(result.value - exact) <= rel_tol * exact
    assert result.panels < 1000


def test_endpoint_singularity_at_tight_tolerance():
    f = lambda t: np.abs(t - 1.0) ** -0.7
    result = integrate_panel(f, 0.0, 1.0, [Singularity.algebraic(1.0, 0.3)], QuadratureConfig(rel_tol=1e-12))
    assert result.value == pytest.approx(1.0 / 0.3, rel=1e-12)


def test_singularity_plus_oscillation():
    f = lambda t: np.abs(t - 0.37) ** -0.6 + np.cos(40.0 * t)
    result = integrate_panel(f, 0.0, 1.0, [Singularity.algebraic(0.37, 0.4)], QuadratureConfig(rel_tol=1e-11))
    exact = _model_integral(0.37, 0.4) + math.sin(40.0) / 40.0
    assert result.value == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("c, s", [(0.5, 0.3), (1.0, 0.3), (0.37, 0.4)])
def test_halving_tolerance_never_worsens(c, s):
    f = lambda t: np.abs(t - c) ** (s - 1.0) * (1.0 + t * t)
    exact = _weighted_model_integral(c, s)
    errors = []
    for k in range(9):
        rel_tol = 1e-8 * 0.5 ** k
        result = integrate_panel(f, 0.0, 1.0, [Singularity.algebraic(c, s)], QuadratureConfig(rel_tol=rel_tol))
        assert abs(result.value - exact) <= rel_tol * exact + 1e-14
        errors.append(result.error)
    assert all(later <= earlier for earlier, later in zip(errors, errors[1:]))


def test_panel_budget_raises():
    f = lambda t: np.sin(1.0 / (t + 0.001))
    with pytest.raises(NonConvergent):
        integrate_panel(f, 0.0, 1.0, cfg=QuadratureConfig(rel_tol=1e-12, max_panels=8))


def test_linearity_on_random_integrands(rng):
    cfg = QuadratureConfig(rel_tol=1e-10)
    sing = [Singularity.logarithmic(0.0)]
    a_coef, b_coef = rng.normal(size=5), rng.normal(size=5)
    alpha, beta = rng.normal(size=2)
    f = lambda t: np.log(t) * np.polynomial.polynomial.polyval(t, a_coef)
    g = lambda t: np.sqrt(t) * np.cos(np.polynomial.polynomial.polyval(t, b_coef))

    i_f = integrate_panel(f, 0.0, 2.0, sing, cfg).value
    i_g = integrate_panel(g, 0.0, 2.0, sing, cfg).value
    combined = integrate_panel(lambda t: alpha * f(t) + beta * g(t), 0.0, 2.0, sing, cfg).value
    scale = abs(alpha) * abs(i_f) + abs(beta) * abs(i_g)
    assert abs(combined - (alpha * i_f + beta * i_g)) <= 10 * cfg.rel_tol * scale


def test_beta_function_value():
    # B(1/2, 3/2) = π/2
    f = lambda t: np.sqrt(t) / np.sqrt(1.0 - t)
    result = integrate_panel(f, 0.0, 1.0, [Singularity.algebraic(1.0, 0.5)])
    assert result.value == pytest.approx(math.pi / 2, rel=1e-9)


def test_lambda_tail_integral():
    result = integrate_tail(lambda_fn, 1.0, 2.0, sings=[Singularity.logarithmic(1.0)])
    assert result.value == pytest.approx(2.0 * math.log(2.0), rel=1e-9)


def test_log_singularity_at_origin_stays_finite():
    # ∫_0^1 log|(τ²-1)/τ²| = (2 log 2 - 2) + 2
    f = lambda t: np.log(np.abs((t * t - 1.0) / (t * t)))
    sings = [Singularity.logarithmic(0.0), Singularity.logarithmic(1.0)]
    result = integrate_panel(f, 0.0, 1.0, sings)
    assert result.value == pytest.approx(2.0 * math.log(2.0), rel=1e-9)
