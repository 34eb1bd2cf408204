"""
特殊函数与积分恒等式

Φ_s、Λ、Ψ、Γ 是奇异核 |x|^{s-1}、log(1/|x|) 在缩放变量 τ = y/x 下的一阶、二阶差分；
本模块计算它们、常数 τ₀ 与 b、间隙函数 f(σ)，并逐条核对波峰渐近分析
所依赖的积分恒等式与不等式组。
"""
import logging
import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache, partial
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from config import QuadratureConfig
from core.errors import DomainError, InvalidInput
from core.quadrature import QuadResult, Singularity, integrate_panel, integrate_tail
from utils.extrapolation import limit
from utils.parallel_utils import parallel_map

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

HALF_PI = 0.5 * math.pi
TAU0_BRACKET = (0.5, 2.0 / 3.0)
TAU0_WIDTH = 1e-13


@dataclass
class IdentityReport:
    """一条数值核对的结果"""
    name: str
    computed: float
    expected: Union[float, Tuple[float, float]]
    tolerance: float = 0.0
    note: str = ""
    passed: bool = field(init=False)

    def __post_init__(self):
        self.computed = float(self.computed)
        self.tolerance = float(self.tolerance)
        if isinstance(self.expected, (tuple, list)):
            lo, hi = (float(v) for v in self.expected)
            self.expected = (lo, hi)
            self.passed = bool(lo - self.tolerance < self.computed < hi + self.tolerance)
        else:
            self.expected = float(self.expected)
            self.passed = bool(abs(self.computed - self.expected) <= self.tolerance)

    @property
    def deviation(self) -> float:
        """与期望值（或区间）的距离"""
        if isinstance(self.expected, tuple):
            lo, hi = self.expected
            return max(lo - self.computed, self.computed - hi, 0.0)
        return abs(self.computed - self.expected)

    def to_dict(self) -> Dict:
        def _finite(v: float) -> Optional[float]:
            return v if math.isfinite(v) else None

        expected = (
            [_finite(v) for v in self.expected]
            if isinstance(self.expected, tuple)
            else self.expected
        )
        return {
            "name": self.name,
            "computed": _finite(self.computed),
            "expected": expected,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "IdentityReport":
        expected = data["expected"]
        if isinstance(expected, list):
            lo, hi = expected
            expected = (-math.inf if lo is None else lo, math.inf if hi is None else hi)
        computed = data.get("computed")
        return cls(
            name=data["name"],
            computed=math.nan if computed is None else computed,
            expected=expected,
            tolerance=data.get("tolerance", 0.0),
            note=data.get("note", ""),
        )


def _prepare(tau: ArrayLike, forbidden: Sequence[float], name: str) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(tau, dtype=float)
    scalar = arr.ndim == 0
    for point in forbidden:
        if np.any(np.abs(arr) == point):
            raise DomainError(f"{name} 在 |τ| = {point} 处无定义")
    return np.atleast_1d(np.abs(arr)), scalar


def _finish(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values[0]) if scalar else values


def phi_s(tau: ArrayLike, s: float) -> ArrayLike:
    """
    Φ_s(τ) = |τ+1|^{s-1} + |τ-1|^{s-1} - 2|τ|^{s-1}

    |τ| > 2 时改写为 τ^{s-1}[expm1((s-1)log1p(1/τ)) + expm1((s-1)log1p(-1/τ))]，
    避免大 τ 处的相消。
    """
    if not 0 < s <= 1:
        raise InvalidInput(f"Φ_s 要求 s ∈ (0,1]: {s}")
    t, scalar = _prepare(tau, (0.0, 1.0), "Φ_s")
    out = np.empty_like(t)
    big = t > 2.0
    tb = t[big]
    out[big] = tb ** (s - 1.0) * (
        np.expm1((s - 1.0) * np.log1p(1.0 / tb)) + np.expm1((s - 1.0) * np.log1p(-1.0 / tb))
    )
    ts = t[~big]
    out[~big] = (ts + 1.0) ** (s - 1.0) + np.abs(ts - 1.0) ** (s - 1.0) - 2.0 * ts ** (s - 1.0)
    return _finish(out, scalar)


def phi(tau: ArrayLike) -> ArrayLike:
    """Φ = Φ_{1/2}"""
    return phi_s(tau, 0.5)


def lambda_fn(tau: ArrayLike) -> ArrayLike:
    """Λ(τ) = -log|1 - 1/τ²|"""
    t, scalar = _prepare(tau, (0.0, 1.0), "Λ")
    out = np.empty_like(t)
    outer = t > 1.0
    out[outer] = -np.log1p(-1.0 / t[outer] ** 2)
    ti = t[~outer]
    out[~outer] = 2.0 * np.log(ti) - np.log1p(-ti ** 2)
    return _finish(out, scalar)


def psi_fn(tau: ArrayLike) -> ArrayLike:
    """Ψ(τ) = log|(1+τ)/(1-τ)|"""
    t, scalar = _prepare(tau, (1.0,), "Ψ")
    out = np.empty_like(t)
    outer = t > 1.0
    out[outer] = 2.0 * np.arctanh(1.0 / t[outer])
    out[~outer] = 2.0 * np.arctanh(t[~outer])
    return _finish(out, scalar)


def gamma_fn(tau: ArrayLike) -> ArrayLike:
    """Γ(τ) = |τ-1|^{-1/2} - (τ+1)^{-1/2}，τ ≥ 0"""
    arr = np.asarray(tau, dtype=float)
    if np.any(arr < 0):
        raise DomainError("Γ 只在 τ ≥ 0 上定义")
    t, scalar = _prepare(arr, (1.0,), "Γ")
    out = np.empty_like(t)
    outer = t > 1.0
    to = t[outer]
    out[outer] = 2.0 / ((np.sqrt(to + 1.0) + np.sqrt(to - 1.0)) * np.sqrt(to * to - 1.0))
    ti = t[~outer]
    out[~outer] = 1.0 / np.sqrt(1.0 - ti) - 1.0 / np.sqrt(1.0 + ti)
    return _finish(out, scalar)


def beta_s(s: ArrayLike) -> ArrayLike:
    """β_s = B(s,s)/2 = Γ(s)²/(2Γ(2s))"""
    arr = np.asarray(s, dtype=float)
    if np.any(arr <= 0):
        raise InvalidInput(f"β_s 要求 s > 0: {s}")
    values = special.gamma(arr) ** 2 / (2.0 * special.gamma(2.0 * arr))
    return float(values) if arr.ndim == 0 else values


def pv_integrand(tau: ArrayLike) -> ArrayLike:
    """((1+τ)^{1/2} - |1-τ|^{1/2})·τ^{-3/2}，有理化后计算"""
    arr = np.asarray(tau, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("主值积分的被积函数只在 τ > 0 上定义")
    t = np.atleast_1d(arr)
    out = np.empty_like(t)
    outer = t >= 1.0
    to = t[outer]
    out[outer] = 2.0 / (np.sqrt(1.0 + to) + np.sqrt(to - 1.0)) * to ** -1.5
    ti = t[~outer]
    out[~outer] = 2.0 / ((np.sqrt(1.0 + ti) + np.sqrt(1.0 - ti)) * np.sqrt(ti))
    return float(out[0]) if arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# 半直线积分
# ---------------------------------------------------------------------------

def _integrate_half_line(f, s_origin: Optional[float], s_unit: Optional[float], decay: float,
                         cfg: QuadratureConfig) -> QuadResult:
    """∫_0^∞ f，在 0 与 1 处按给定代数指数做奇异变换，2 之后按幂律尾部"""
    near = [Singularity.algebraic(1.0, s_unit)] if s_unit is not None else []
    origin = [Singularity.algebraic(0.0, s_origin)] if s_origin is not None else []
    head = integrate_panel(f, 0.0, 1.0, origin + near, cfg)
    middle = integrate_panel(f, 1.0, 2.0, near, cfg)
    tail = integrate_tail(f, 2.0, decay, cfg)
    return head + middle + tail


def _homogeneous_moment(s: float, cfg: QuadratureConfig) -> QuadResult:
    """∫_0^∞ Φ_s(τ)τ^s dτ；原点处 Φ_sτ^s ~ -2τ^{2s-1}，无穷远处 ~ (s-1)(s-2)τ^{2s-3}"""
    return _integrate_half_line(
        lambda t: phi_s(t, s) * t ** s,
        s_origin=s if s < 1 else None,
        s_unit=s,
        decay=3.0 - 2.0 * s,
        cfg=cfg,
    )


def verify_beta_identity(s: float, cfg: Optional[QuadratureConfig] = None, tolerance: float = 1e-8) -> IdentityReport:
    """核对 ∫_0^∞ Φ_s(τ)τ^s dτ = β_s"""
    if not 0 < s < 1:
        raise InvalidInput(f"β 恒等式要求 s ∈ (0,1): {s}")
    cfg = cfg or QuadratureConfig()
    result = _homogeneous_moment(s, cfg)
    return IdentityReport(
        name=f"beta_identity_s{s:.2f}",
        computed=result.value,
        expected=beta_s(s),
        tolerance=tolerance,
        note=f"quadrature error estimate {result.error:.2e}",
    )


def verify_phi_zero_mass(cfg: Optional[QuadratureConfig] = None, tolerance: float = 1e-8) -> IdentityReport:
    """核对 ∫_0^∞ Φ(τ)dτ = 0"""
    cfg = cfg or QuadratureConfig()
    result = _integrate_half_line(phi, 0.5, 0.5, 2.5, cfg)
    return IdentityReport("phi_zero_mass", result.value, 0.0, tolerance,
                          note=f"quadrature error estimate {result.error:.2e}")


def verify_phi_half_moment(cfg: Optional[QuadratureConfig] = None, tolerance: float = 1e-8) -> IdentityReport:
    """核对 ∫_0^∞ Φ(τ)τ^{1/2} dτ = π/2"""
    cfg = cfg or QuadratureConfig()
    result = _homogeneous_moment(0.5, cfg)
    return IdentityReport("phi_half_moment", result.value, HALF_PI, tolerance,
                          note=f"quadrature error estimate {result.error:.2e}")


def verify_pv_integral(cfg: Optional[QuadratureConfig] = None, tolerance: float = 1e-8) -> IdentityReport:
    """核对 ∫_0^∞ ((1+τ)^{1/2} - |1-τ|^{1/2})τ^{-3/2} dτ = π"""
    cfg = cfg or QuadratureConfig()
    result = _integrate_half_line(pv_integrand, 0.5, 0.5, 2.0, cfg)
    return IdentityReport("pv_integral", result.value, math.pi, tolerance,
                          note=f"quadrature error estimate {result.error:.2e}")


# ---------------------------------------------------------------------------
# τ₀ 与 b
# ---------------------------------------------------------------------------

def _bisect_sign_change(func, lo: float, hi: float, width: float) -> Tuple[float, float]:
    """二分求 func 的变号区间，要求 func(lo) < 0 < func(hi)"""
    if not (func(lo) < 0 < func(hi)):
        raise InvalidInput(f"区间 [{lo}, {hi}] 两端不变号")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if func(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


_constants_lock = threading.Lock()
_tau0_bracket: Optional[Tuple[float, float]] = None


def tau0_bracket() -> Tuple[float, float]:
    """Φ 在 (0,1) 内唯一零点的二分区间，宽度不超过 1e-13"""
    global _tau0_bracket
    if _tau0_bracket is None:
        with _constants_lock:
            if _tau0_bracket is None:
                _tau0_bracket = _bisect_sign_change(phi, *TAU0_BRACKET, TAU0_WIDTH)
                logger.debug(f"τ₀ 区间: [{_tau0_bracket[0]!r}, {_tau0_bracket[1]!r}]")
    return _tau0_bracket


def tau0() -> float:
    """Φ 在 (0,1) 内的唯一零点 τ₀"""
    lo, hi = tau0_bracket()
    return 0.5 * (lo + hi)


def b_closed(t: ArrayLike) -> ArrayLike:
    """
    b(t) = -∫_0^t Φ(τ)τ^{1/2}dτ 的闭式
         = 2t - 2t^{3/2}/((1+t)^{1/2}+(1-t)^{1/2}) + arsinh(√t) - arcsin(√t)
    """
    arr = np.asarray(t, dtype=float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise DomainError("b_closed 只在 (0,1) 上定义")
    root = np.sqrt(arr)
    values = (
        2.0 * arr
        - 2.0 * arr * root / (np.sqrt(1.0 + arr) + np.sqrt(1.0 - arr))
        + np.arcsinh(root)
        - np.arcsin(root)
    )
    return float(values) if arr.ndim == 0 else values


def b_constant() -> float:
    """b = -∫_0^{τ₀} Φ(τ)τ^{1/2}dτ"""
    return b_closed(tau0())


def b_bracket() -> Tuple[float, float]:
    """b 的可靠区间：b_closed 在 (0,1) 上递增，因此取 τ₀ 区间端点处的值"""
    lo, hi = tau0_bracket()
    return b_closed(lo), b_closed(hi)


def phi_antiderivative(t: ArrayLike) -> ArrayLike:
    """F(t) = 2(1+t)^{1/2} - 2(1-t)^{1/2} - 4t^{1/2}，F' = Φ on (0,1)"""
    arr = np.asarray(t, dtype=float)
    if np.any((arr < 0) | (arr > 1)):
        raise DomainError("phi_antiderivative 只在 [0,1] 上定义")
    values = 2.0 * np.sqrt(1.0 + arr) - 2.0 * np.sqrt(1.0 - arr) - 4.0 * np.sqrt(arr)
    return float(values) if arr.ndim == 0 else values


def upper_bound_expression(t: ArrayLike) -> ArrayLike:
    """1/(t^{-1}-1)^{1/2} - 1/(t^{-1}+1)^{1/2} + arsinh√t - arcsin√t"""
    arr = np.asarray(t, dtype=float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise DomainError("upper_bound_expression 只在 (0,1) 上定义")
    root = np.sqrt(arr)
    values = (
        1.0 / np.sqrt(1.0 / arr - 1.0)
        - 1.0 / np.sqrt(1.0 / arr + 1.0)
        + np.arcsinh(root)
        - np.arcsin(root)
    )
    return float(values) if arr.ndim == 0 else values


@lru_cache(maxsize=4)
def moment_split(cfg: QuadratureConfig = QuadratureConfig()) -> Tuple[float, float]:
    """
    (∫_0^{τ₀} Φτ^{1/2}, ∫_{τ₀}^∞ Φτ^{1/2})，按求积计算并缓存
    """
    weight = lambda t: phi(t) * np.sqrt(t)
    t0 = tau0()
    inner = integrate_panel(weight, 0.0, t0, [Singularity.algebraic(0.0, 0.5)], cfg)
    outer = (
        integrate_panel(weight, t0, 1.0, [Singularity.algebraic(1.0, 0.5)], cfg)
        + integrate_panel(weight, 1.0, 2.0, [Singularity.algebraic(1.0, 0.5)], cfg)
        + integrate_tail(weight, 2.0, 2.0, cfg)
    )
    logger.debug(f"Φτ^(1/2) 的分段积分: 内 {inner.value:.15g}, 外 {outer.value:.15g}")
    return inner.value, outer.value


def verify_moment_consistency(cfg: Optional[QuadratureConfig] = None, tolerance: float = 1e-8) -> IdentityReport:
    """核对 ∫_{τ₀}^∞ Φτ^{1/2} = π/2 + b"""
    _, outer = moment_split(cfg or QuadratureConfig())
    return IdentityReport("outer_moment_equals_half_pi_plus_b", outer, HALF_PI + b_constant(), tolerance)


def verify_zero_mass_split(cfg: Optional[QuadratureConfig] = None, tolerance: float = 1e-8) -> IdentityReport:
    """核对 ∫_0^{τ₀}Φ = -∫_{τ₀}^∞Φ"""
    cfg = cfg or QuadratureConfig()
    t0 = tau0()
    inner = integrate_panel(phi, 0.0, t0, [Singularity.algebraic(0.0, 0.5)], cfg)
    outer = (
        integrate_panel(phi, t0, 1.0, [Singularity.algebraic(1.0, 0.5)], cfg)
        + integrate_panel(phi, 1.0, 2.0, [Singularity.algebraic(1.0, 0.5)], cfg)
        + integrate_tail(phi, 2.0, 2.5, cfg)
    )
    return IdentityReport("phi_mass_split", inner.value, -outer.value, tolerance)


def verify_upper_bound_identity(t: float = 2.0 / 3.0, cfg: Optional[QuadratureConfig] = None,
                                tolerance: float = 1e-9) -> IdentityReport:
    """核对 -∫_0^t Φτ^{1/2} + t^{3/2}Φ(t) 的闭式"""
    cfg = cfg or QuadratureConfig()
    integral = integrate_panel(lambda x: phi(x) * np.sqrt(x), 0.0, t, [Singularity.algebraic(0.0, 0.5)], cfg)
    computed = -integral.value + t ** 1.5 * phi(t)
    return IdentityReport(f"upper_bound_identity_t{t:.3f}", computed, upper_bound_expression(t), tolerance)


# ---------------------------------------------------------------------------
# 间隙函数 f(σ)
# ---------------------------------------------------------------------------

def _homogeneous_root(s: float) -> float:
    """Φ_s 在 (0,1) 内的零点"""
    lo, hi = _bisect_sign_change(lambda t: phi_s(t, s), 1e-9, 1.0 - 1e-9, TAU0_WIDTH)
    return 0.5 * (lo + hi)


def _gap_function(s: float, sigma: float, root: float, inner: float, outer: float,
                  cfg: QuadratureConfig) -> float:
    """
    f_s(σ) = ∫_0^{τ₀}Φ_s·min(1, στ^s) + σ^{-2}b_s + B_s(1 - σ^{-1})

    其中 b_s = -∫_0^{τ₀}Φ_sτ^s，B_s = ∫_{τ₀}^∞Φ_sτ^s。
    """
    weighted = lambda t: phi_s(t, s) * t ** s
    kink = sigma ** (-1.0 / s)
    origin = [Singularity.algebraic(0.0, s)]
    if kink < root:
        below = integrate_panel(weighted, 0.0, kink, origin, cfg).value
        above = integrate_panel(lambda t: phi_s(t, s), kink, root, (), cfg).value
        clipped = sigma * below + above
    else:
        clipped = sigma * integrate_panel(weighted, 0.0, root, origin, cfg).value
    return clipped - inner * sigma ** -2 + outer * (1.0 - 1.0 / sigma)


def f_sigma(sigma: float, cfg: Optional[QuadratureConfig] = None) -> float:
    """间隙函数 f(σ)，σ ≥ 1；按求积计算，min(1, στ^{1/2}) 的折点处切分"""
    if sigma < 1:
        raise InvalidInput(f"f(σ) 要求 σ ≥ 1: {sigma}")
    cfg = cfg or QuadratureConfig()
    b = b_constant()
    return _gap_function(0.5, float(sigma), tau0(), -b, HALF_PI + b, cfg)


def f_sigma_lower_bound(sigma: ArrayLike) -> ArrayLike:
    """f(σ) ≥ (1-σ^{-1})(π/2 - b(σ+σ^{-1}))"""
    sig = np.asarray(sigma, dtype=float)
    b = b_constant()
    values = (1.0 - 1.0 / sig) * (HALF_PI - b * (sig + 1.0 / sig))
    return float(values) if sig.ndim == 0 else values


def f_sigma_derivative(sigma: ArrayLike) -> ArrayLike:
    """σ > √2 时 f'(σ) = ∫_0^{σ^{-2}}Φτ^{1/2} - 2σ^{-3}b + (π/2+b)σ^{-2}"""
    sig = np.asarray(sigma, dtype=float)
    if np.any(sig <= math.sqrt(2.0)):
        raise InvalidInput("f'(σ) 的表达式只在 σ > √2 上成立")
    b = b_constant()
    values = -b_closed(sig ** -2) - 2.0 * b * sig ** -3 + (HALF_PI + b) * sig ** -2
    return float(values) if sig.ndim == 0 else values


def f_sigma_derivative_floor(sigma: ArrayLike) -> ArrayLike:
    """f'(σ) 的下界 ((π-3)/2)σ^{-2} + (2/15)σ^{-3}"""
    sig = np.asarray(sigma, dtype=float)
    values = 0.5 * (math.pi - 3.0) * sig ** -2 + (2.0 / 15.0) * sig ** -3
    return float(values) if sig.ndim == 0 else values


# ---------------------------------------------------------------------------
# 不等式组
# ---------------------------------------------------------------------------

def min_weight_integral(sigma: ArrayLike) -> ArrayLike:
    """J(σ) = ∫_0^{τ₀}Φ·min(1, στ^{1/2}) 的闭式，σ > 0"""
    sig = np.asarray(sigma, dtype=float)
    if np.any(sig <= 0):
        raise InvalidInput("J(σ) 要求 σ > 0")
    t0 = tau0()
    t = np.minimum(sig ** -2.0, t0)
    values = -sig * b_closed(t) + phi_antiderivative(t0) - phi_antiderivative(t)
    return float(values) if sig.ndim == 0 else values


@dataclass(frozen=True)
class InequalityResult:
    """一组 (m, M) 对上下两条不等式的判定"""
    satisfies_upper: bool
    satisfies_lower: bool
    upper_margin: float
    lower_margin: float

    @property
    def satisfies_both(self) -> bool:
        return self.satisfies_upper and self.satisfies_lower


def _inequality_margins(m: np.ndarray, big_m: np.ndarray, symmetric: bool,
                        cfg: QuadratureConfig) -> Tuple[np.ndarray, np.ndarray]:
    inner, outer = moment_split(cfg)
    upper = m * inner + big_m * outer - big_m ** 2
    if symmetric:
        lower = m ** 2 - (big_m * inner + m * outer)
    else:
        lower = m ** 2 - (m * min_weight_integral(big_m / m) + m * outer)
    return upper, lower


def _check_pair(m: float, big_m: float):
    if not (m > 0 and big_m > 0):
        raise InvalidInput(f"要求 m, M > 0: ({m}, {big_m})")
    if m > big_m:
        raise InvalidInput(f"要求 m ≤ M: ({m}, {big_m})")


def inequality_region(m: float, big_m: float, tolerance: float = 1e-9,
                      cfg: Optional[QuadratureConfig] = None) -> InequalityResult:
    """
    判定加强后的不等式组：
        M² ≤ m∫_0^{τ₀}Φτ^{1/2} + M∫_{τ₀}^∞Φτ^{1/2}
        m² ≥ ∫_0^{τ₀}Φ·min(m, Mτ^{1/2}) + m∫_{τ₀}^∞Φτ^{1/2}
    """
    _check_pair(m, big_m)
    upper, lower = _inequality_margins(np.float64(m), np.float64(big_m), False, cfg or QuadratureConfig())
    return InequalityResult(bool(upper >= -tolerance), bool(lower >= -tolerance), float(upper), float(lower))


def symmetric_inequality_region(m: float, big_m: float, tolerance: float = 1e-9,
                                cfg: Optional[QuadratureConfig] = None) -> InequalityResult:
    """对称不等式组：第二式右端为 M∫_0^{τ₀}Φτ^{1/2} + m∫_{τ₀}^∞Φτ^{1/2}"""
    _check_pair(m, big_m)
    upper, lower = _inequality_margins(np.float64(m), np.float64(big_m), True, cfg or QuadratureConfig())
    return InequalityResult(bool(upper >= -tolerance), bool(lower >= -tolerance), float(upper), float(lower))


@dataclass
class ScanResult:
    """(m, M) 网格扫描结果"""
    solutions: np.ndarray
    max_distance: float
    slack: float
    resolution: int


def inequality_scan(resolution: int = 400, extent: float = 4.0, slack: Optional[float] = None,
                    symmetric: bool = False, cfg: Optional[QuadratureConfig] = None) -> ScanResult:
    """
    在 (0, extent]² 的楔形 m ≤ M 上扫描同时满足两条不等式的格点

    slack 缺省取网格间距的四分之一：不等式两端都是 O(1) 量，
    这样离 (π/2, π/2) 最近的格点仍能被识别为解。
    """
    cfg = cfg or QuadratureConfig()
    axis = extent * np.arange(1, resolution + 1) / resolution
    slack = 0.25 * extent / resolution if slack is None else slack
    m, big_m = np.meshgrid(axis, axis, indexing="ij")
    wedge = m <= big_m
    upper, lower = _inequality_margins(m[wedge], big_m[wedge], symmetric, cfg)
    hits = (upper >= -slack) & (lower >= -slack)
    solutions = np.column_stack([m[wedge][hits], big_m[wedge][hits]])
    if len(solutions):
        max_distance = float(np.max(np.hypot(solutions[:, 0] - HALF_PI, solutions[:, 1] - HALF_PI)))
    else:
        max_distance = math.inf
    logger.debug(f"不等式扫描: {len(solutions)} 个解，离 (π/2,π/2) 最远 {max_distance:.3e}")
    return ScanResult(solutions, max_distance, slack, resolution)


def verify_lower_bound_positivity(cfg: Optional[QuadratureConfig] = None) -> List[IdentityReport]:
    """m > 0 与 M < ∞ 两个先验界所用的积分"""
    cfg = cfg or QuadratureConfig()
    unit = [Singularity.algebraic(1.0, 0.5)]
    shifted = lambda t: phi(t) * (np.sqrt(t) - 1.0)
    positive = integrate_panel(shifted, 1.0, 2.0, unit, cfg) + integrate_tail(shifted, 2.0, 2.0, cfg)

    weight = lambda t: phi(t) * np.sqrt(t)
    bounded = (
        integrate_panel(phi, tau0(), 1.0, unit, cfg)
        + integrate_panel(weight, 1.0, 2.0, unit, cfg)
        + integrate_tail(weight, 2.0, 2.0, cfg)
    )
    return [
        IdentityReport("shifted_outer_moment_positive", positive.value, (0.0, math.inf)),
        IdentityReport("outer_mass_finite_positive", bounded.value, (0.0, math.inf)),
    ]


# ---------------------------------------------------------------------------
# 对数型辅助极限
# ---------------------------------------------------------------------------

def _log_level(x: float) -> float:
    return math.log(1.0 / x)


def _geometric_points(lo: float, hi: float) -> List[float]:
    points = []
    p = 2.0 * lo
    while p < hi:
        points.append(p)
        p *= 2.0
    return points


def _auxiliary_integral_y(x: float, nu: float, cfg: QuadratureConfig) -> float:
    """∫_x^ν δ²ₓL(y)ℓ(y)dy / ℓ(x)²，直接在 y 变量下计算"""
    ell = lambda y: y * np.log(1.0 / y)
    second_difference = lambda y: -np.log((y - x) * (y + x) / (y * y))
    value = integrate_panel(
        lambda y: second_difference(y) * ell(y),
        x, nu, [Singularity.logarithmic(x)], cfg,
        breakpoints=_geometric_points(x, nu),
    ).value
    return value / (x * _log_level(x)) ** 2


def _log_case_integral(x: float, nu: float, cfg: QuadratureConfig) -> float:
    """∫_1^{ν/x} Λ(τ)τ log(1/(τx)) dτ / log(1/x)²"""
    upper = nu / x
    value = integrate_panel(
        lambda t: lambda_fn(t) * t * np.log(1.0 / (t * x)),
        1.0, upper, [Singularity.logarithmic(1.0)], cfg,
        breakpoints=_geometric_points(1.0, upper),
    ).value
    return value / _log_level(x) ** 2


def _derivative_upper_integral(x: float, delta: float, cfg: QuadratureConfig) -> float:
    """∫_2^{δ/x} Ψ'(τ)τ L(τx) dτ / L(x)²，Ψ'(τ) = -2/(τ²-1)"""
    upper = delta / x
    value = integrate_panel(
        lambda t: -2.0 * t / (t * t - 1.0) * np.log(1.0 / (t * x)),
        2.0, upper, (), cfg,
        breakpoints=_geometric_points(2.0, upper),
    ).value
    return value / _log_level(x) ** 2


def _derivative_lower_integral(x: float, cfg: QuadratureConfig) -> float:
    """∫_0^2 Ψ(τ)L(τx) dτ / L(x)²"""
    value = integrate_panel(
        lambda t: psi_fn(t) * np.log(1.0 / (t * x)),
        0.0, 2.0, [Singularity.logarithmic(0.0), Singularity.logarithmic(1.0)], cfg,
    ).value
    return value / _log_level(x) ** 2


def _extrapolated_report(name: str, sequence: Dict[float, float], expected: float, tolerance: float,
                         diagnostic: float) -> IdentityReport:
    xs = np.array(sorted(sequence))
    eps = 1.0 / np.log(1.0 / xs)
    values = np.array([sequence[x] for x in xs])
    extrapolated, misfit = limit(eps, values, n_terms=3)
    return IdentityReport(
        name, extrapolated, expected, tolerance,
        note=f"raw at x=1e-3: {diagnostic:.6f}; fit misfit {misfit:.2e}",
    )


def verify_log_limits(cfg: Optional[QuadratureConfig] = None, nu: float = 0.25,
                      exponents: Sequence[int] = tuple(range(8, 45, 4)),
                      tolerance: float = 0.02) -> List[IdentityReport]:
    """
    在 x = 2^{-j} 序列上计算对数型辅助积分并按 1/log(1/x) 外推

    Returns:
        四条报告：y 变量形式与 τ 变量形式的 1/2 极限、导数上段积分的 -1 极限、
        导数下段积分的 0 极限
    """
    cfg = cfg or QuadratureConfig()
    xs = [2.0 ** -j for j in exponents]
    limits = {
        "log_auxiliary_integral_limit": (lambda x: _auxiliary_integral_y(x, nu, cfg), 0.5),
        "log_case_limit": (lambda x: _log_case_integral(x, nu, cfg), 0.5),
        "derivative_upper_integral_limit": (lambda x: _derivative_upper_integral(x, nu, cfg), -1.0),
        "derivative_lower_integral_limit": (lambda x: _derivative_lower_integral(x, cfg), 0.0),
    }
    reports = []
    for name, (integral, expected) in limits.items():
        sequence = {x: integral(x) for x in xs}
        diagnostic = integral(1e-3)
        reports.append(_extrapolated_report(name, sequence, expected, tolerance, diagnostic))
        logger.debug(f"{name}: 外推 {reports[-1].computed:.6f}，x=1e-3 原始值 {diagnostic:.6f}")
    return reports


# ---------------------------------------------------------------------------
# 齐次指数阈值（可选扫描）
# ---------------------------------------------------------------------------

def homogeneous_gap_minimum(s: float, sigmas: Sequence[float], cfg: Optional[QuadratureConfig] = None) -> float:
    """min_σ f_s(σ)；为正表示 (β_s, β_s) 在加强不等式组中孤立"""
    cfg = cfg or QuadratureConfig()
    root = _homogeneous_root(s)
    origin = [Singularity.algebraic(0.0, s)]
    inner = integrate_panel(lambda t: phi_s(t, s) * t ** s, 0.0, root, origin, cfg).value
    outer = beta_s(s) - inner
    return min(_gap_function(s, float(sig), root, inner, outer, cfg) for sig in sigmas)


def locate_homogeneous_threshold(cfg: Optional[QuadratureConfig] = None,
                                 exponents: Sequence[float] = tuple(np.round(np.arange(0.2, 0.62, 0.02), 2)),
                                 sigmas: Sequence[float] = tuple(np.geomspace(1.01, 50.0, 40))) -> Tuple[float, Dict[float, float]]:
    """
    扫描齐次指数 s，返回使 f_s 在 σ 网格上恒正的最小 s（预期约 1/3）及各 s 的最小值
    """
    cfg = cfg or QuadratureConfig(rel_tol=1e-8)
    minima = {float(s): homogeneous_gap_minimum(float(s), sigmas, cfg) for s in exponents}
    threshold = math.nan
    for s in sorted(minima, reverse=True):
        if minima[s] > 0:
            threshold = s
        else:
            break
    logger.info(f"齐次指数阈值估计: s₀ ≈ {threshold}")
    return threshold, minima


# ---------------------------------------------------------------------------
# 汇总
# ---------------------------------------------------------------------------

def constants_reports(cfg: Optional[QuadratureConfig] = None) -> List[IdentityReport]:
    """τ₀、b 与 f(σ) 的核对"""
    cfg = cfg or QuadratureConfig()
    lo, hi = tau0_bracket()
    b_lo, b_hi = b_bracket()
    sigmas = np.geomspace(1.0, 100.0, 201)[1:]
    f_values = np.array([f_sigma(s, cfg) for s in sigmas])
    slope_points = np.geomspace(1.5, 90.0, 24)
    slopes = (np.array([f_sigma(s * 1.001, cfg) for s in slope_points])
              - np.array([f_sigma(s, cfg) for s in slope_points])) / (0.001 * slope_points)
    derivative_gap = f_sigma_derivative(slope_points) - f_sigma_derivative_floor(slope_points)
    return [
        IdentityReport("tau0_bracket", tau0(), TAU0_BRACKET, note=f"width {hi - lo:.1e}"),
        IdentityReport("tau0_bracket_width", hi - lo, (0.0, 1e-12)),
        IdentityReport("phi_at_tau0", phi(tau0()), 0.0, 1e-12),
        IdentityReport("b_bracket", b_constant(), (0.5, 0.6), note=f"[{b_lo!r}, {b_hi!r}]"),
        IdentityReport("b_closed_at_two_thirds", b_closed(2.0 / 3.0), (0.5, math.inf)),
        IdentityReport("f_at_one", f_sigma(1.0, cfg), 0.0, 1e-9),
        IdentityReport("f_at_two", f_sigma(2.0, cfg), ((math.pi - 3.0) / 4.0, math.inf)),
        IdentityReport("f_positivity_min", float(np.min(f_values)), (0.0, math.inf),
                       note=f"{len(sigmas)} log-spaced points on (1, 100]"),
        IdentityReport("f_increasing_min_slope", float(np.min(slopes)), (0.0, math.inf)),
        IdentityReport("f_derivative_floor_gap", float(np.min(derivative_gap)), (0.0, math.inf)),
        verify_upper_bound_identity(2.0 / 3.0, cfg),
    ]


def inequality_reports(cfg: Optional[QuadratureConfig] = None, resolution: int = 400) -> List[IdentityReport]:
    """不等式组在 (π/2, π/2) 处取等并且该点在网格上孤立"""
    cfg = cfg or QuadratureConfig()
    at_target = inequality_region(HALF_PI, HALF_PI, cfg=cfg)
    scan = inequality_scan(resolution=resolution, cfg=cfg)
    symmetric = inequality_scan(resolution=resolution, symmetric=True, cfg=cfg)
    return [
        IdentityReport("inequality_upper_equality", at_target.upper_margin, 0.0, 1e-8),
        IdentityReport("inequality_lower_equality", at_target.lower_margin, 0.0, 1e-8),
        IdentityReport("inequality_scan_max_distance", scan.max_distance, (0.0, 1e-2),
                       note=f"{len(scan.solutions)} grid solutions, slack {scan.slack:.1e}"),
        IdentityReport("symmetric_scan_solution_count", len(symmetric.solutions), (len(scan.solutions) - 0.5, math.inf),
                       note=f"symmetric system keeps a wedge, max distance {symmetric.max_distance:.3f}"),
    ]


BETA_SWEEP = tuple(round(0.1 * k, 1) for k in range(1, 10))


def run_identity_suite(cfg: Optional[QuadratureConfig] = None, n_jobs: int = 1, resolution: int = 400,
                       include_log_limits: bool = True, progress: bool = False) -> List[IdentityReport]:
    """
    完整的恒等式、常数与不等式组核对

    β 恒等式的 s 扫描彼此独立，按 n_jobs 并行；其余各项顺序计算。
    """
    cfg = cfg or QuadratureConfig()
    logger.info(f"开始恒等式核对（β 扫描 {len(BETA_SWEEP)} 个指数，不等式网格 {resolution}×{resolution}）")
    reports = parallel_map(partial(verify_beta_identity, cfg=cfg), BETA_SWEEP,
                           n_jobs=n_jobs, desc="β 恒等式", progress=progress)
    reports += [
        verify_phi_zero_mass(cfg),
        verify_phi_half_moment(cfg),
        verify_pv_integral(cfg),
        verify_moment_consistency(cfg),
        verify_zero_mass_split(cfg),
    ]
    reports += verify_lower_bound_positivity(cfg)
    reports += constants_reports(cfg)
    reports += inequality_reports(cfg, resolution)
    if include_log_limits:
        reports += verify_log_limits(cfg)

    failed = [r.name for r in reports if not r.passed]
    if failed:
        logger.warning(f"{len(failed)}/{len(reports)} 项核对未通过: {', '.join(failed)}")
    else:
        logger.info(f"全部 {len(reports)} 项核对通过")
    return reports
