"""
卷积核模块

Whitham 核 K_W（符号 √(tanh ξ/ξ)）与双向 Whitham 核 K_B（符号 tanh ξ/ξ），
以及作为对照的纯齐次核 |x|^{s-1} 与纯对数核 log(1/|x|)。
核的约定为 K(x) = (1/2π)∫ K̂(ξ)e^{iξx}dξ = (1/π)∫_0^∞ K̂(ξ)cos(ξx)dξ。
"""
import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import special

from config import QuadratureConfig
from core.errors import DomainError, InvalidInput
from core.quadrature import Singularity, integrate_panel, integrate_tail
from core.special_functions import IdentityReport
from utils.extrapolation import richardson_limit

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
KernelEvaluator = Callable[[ArrayLike], ArrayLike]

# 公开求值接口拒绝的最小 |x|
KERNEL_FLOOR = 1e-12
# K_W、K_B 按 e^{-π|x|/2} 衰减，超过该距离后视为零
EXPONENTIAL_CUT = 40.0
# 反 Fourier 积分的截断频率，余项按 e^{-2ξ} 衰减
SYMBOL_CUT = 20.0
DEFAULT_SERIES_TERMS = 1024
_SERIES_CHUNK = 64


class KernelFamily(str, Enum):
    """核族"""
    WHITHAM = "whitham"
    BIDIRECTIONAL = "bidirectional"
    PURE_HOMOGENEOUS = "homogeneous"
    PURE_LOGARITHMIC = "logarithmic"


class SingularKind(str, Enum):
    """奇异部分的类型"""
    HOMOGENEOUS = "homogeneous"
    LOGARITHMIC = "logarithmic"


_DEFAULT_SCALES = {
    KernelFamily.WHITHAM: math.sqrt(2.0 * math.pi),
    KernelFamily.BIDIRECTIONAL: math.pi,
    KernelFamily.PURE_HOMOGENEOUS: 1.0,
    KernelFamily.PURE_LOGARITHMIC: 1.0,
}


@dataclass(frozen=True)
class KernelSpec:
    """
    核的描述

    scale 是使奇异部分恰为 H(x)=|x|^{-1/2}（齐次）或 L(x)=log(1/|x|)（对数）的倍数；
    缺省按核族取值。
    """
    family: KernelFamily
    s: float = 0.5
    scale: Optional[float] = None
    series_terms: int = DEFAULT_SERIES_TERMS

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if self.scale is None:
            object.__setattr__(self, "scale", _DEFAULT_SCALES[self.family])
        if not self.scale > 0:
            raise InvalidInput(f"scale 必须大于0: {self.scale}")
        if not 0 < self.s < 1:
            raise InvalidInput(f"齐次指数 s 必须在 (0,1) 内: {self.s}")
        if self.series_terms < 1:
            raise InvalidInput(f"series_terms 至少为1: {self.series_terms}")

    @classmethod
    def whitham(cls, series_terms: int = DEFAULT_SERIES_TERMS) -> "KernelSpec":
        return cls(KernelFamily.WHITHAM, series_terms=series_terms)

    @classmethod
    def bidirectional(cls) -> "KernelSpec":
        return cls(KernelFamily.BIDIRECTIONAL)

    @classmethod
    def homogeneous(cls, s: float = 0.5) -> "KernelSpec":
        return cls(KernelFamily.PURE_HOMOGENEOUS, s=s)

    @classmethod
    def logarithmic(cls) -> "KernelSpec":
        return cls(KernelFamily.PURE_LOGARITHMIC)

    @property
    def is_pure(self) -> bool:
        return self.family in (KernelFamily.PURE_HOMOGENEOUS, KernelFamily.PURE_LOGARITHMIC)

    @property
    def singular_kind(self) -> SingularKind:
        if self.family in (KernelFamily.BIDIRECTIONAL, KernelFamily.PURE_LOGARITHMIC):
            return SingularKind.LOGARITHMIC
        return SingularKind.HOMOGENEOUS

    @property
    def singular_exponent(self) -> float:
        """齐次奇异部分 |x|^{s-1} 的 s；对数型返回 0"""
        if self.singular_kind == SingularKind.LOGARITHMIC:
            return 0.0
        return 0.5 if self.family == KernelFamily.WHITHAM else self.s


def kernel_singularity(spec: KernelSpec, location: float) -> Singularity:
    """核在 location 处的奇点，供求积使用"""
    if spec.singular_kind == SingularKind.LOGARITHMIC:
        return Singularity.logarithmic(location)
    return Singularity.algebraic(location, spec.singular_exponent)


def _as_array(x: ArrayLike) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _finish(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values[0]) if scalar else values


def _check_floor(x: np.ndarray, what: str):
    if np.any(np.abs(x) < KERNEL_FLOOR):
        raise DomainError(f"{what} 在 |x| < {KERNEL_FLOOR:g} 处发散")


# ---------------------------------------------------------------------------
# 符号
# ---------------------------------------------------------------------------

def symbol(spec: KernelSpec, xi: ArrayLike) -> ArrayLike:
    """
    核的 Fourier 符号

    Whitham 为 √(tanh ξ/ξ)，双向为 tanh ξ/ξ，ξ=0 处取极限 1；
    纯齐次核为 2Γ(s)cos(πs/2)|ξ|^{-s}，纯对数核为 π/|ξ|（ξ=0 处无定义）。
    """
    w, scalar = _as_array(xi)
    w = np.abs(w)
    if spec.is_pure:
        if np.any(w == 0):
            raise DomainError("纯奇异核的符号在 ξ=0 处发散")
        if spec.family == KernelFamily.PURE_HOMOGENEOUS:
            values = 2.0 * special.gamma(spec.s) * math.cos(0.5 * math.pi * spec.s) * w ** -spec.s
        else:
            values = math.pi / w
        return _finish(values, scalar)

    ratio = np.ones_like(w)
    small = w < 1e-4
    ws = w[small]
    ratio[small] = 1.0 - ws ** 2 / 3.0 + 2.0 * ws ** 4 / 15.0
    wl = w[~small]
    ratio[~small] = np.tanh(wl) / wl
    values = np.sqrt(ratio) if spec.family == KernelFamily.WHITHAM else ratio
    return _finish(values, scalar)


def periodized_fourier_coefficients(spec: KernelSpec, period: float, n_modes: int) -> np.ndarray:
    """P 周期卷积的 Fourier 乘子：第 k 项为 symbol(2πk/P)，k = 0..N"""
    if spec.is_pure:
        raise InvalidInput("纯奇异核没有有限的周期化系数")
    if not period > 0:
        raise InvalidInput(f"period 必须大于0: {period}")
    if n_modes < 4:
        raise InvalidInput(f"模数至少为4: {n_modes}")
    k = np.arange(n_modes + 1, dtype=float)
    return symbol(spec, 2.0 * math.pi * k / period)


# ---------------------------------------------------------------------------
# 闭式与级数
# ---------------------------------------------------------------------------

def _bidirectional_raw(x: np.ndarray) -> np.ndarray:
    """(1/π)log coth(π|x|/4) = (1/π)[log1p(q) - log(-expm1(-2z))]，q = e^{-2z}"""
    z = 0.25 * math.pi * np.abs(x)
    return (np.log1p(np.exp(-2.0 * z)) - np.log(-np.expm1(-2.0 * z))) / math.pi


def _bidirectional_derivative_raw(x: np.ndarray) -> np.ndarray:
    """K_B'(x) = -sign(x)/(2 sinh(π|x|/2))"""
    w = 0.5 * math.pi * np.abs(x)
    return -np.sign(x) * 0.5 * np.exp(-w) / (-np.expm1(-2.0 * w))


def _bidirectional_second_raw(x: np.ndarray) -> np.ndarray:
    """K_B''(x) = (π/4)cosh(w)/sinh²(w)，w = π|x|/2"""
    w = 0.5 * math.pi * np.abs(x)
    q = np.exp(-2.0 * w)
    return 0.25 * math.pi * 2.0 * np.exp(-w) * (1.0 + q) / np.expm1(-2.0 * w) ** 2


def kernel_bidirectional_closed(x: ArrayLike) -> ArrayLike:
    """K_B(x) = (1/π)log coth(π|x|/4)，x ≠ 0"""
    arr, scalar = _as_array(x)
    _check_floor(arr, "K_B")
    return _finish(_bidirectional_raw(arr), scalar)


def _binomial_half(n_pairs: int) -> Tuple[np.ndarray, np.ndarray]:
    """c_k = binom(k-1/2, k) 与 c_{k-1}，k = 1..n_pairs"""
    k = np.arange(1, n_pairs + 1, dtype=float)
    c = np.cumprod((k - 0.5) / k)
    c_prev = np.concatenate(([1.0], c[:-1]))
    return c, c_prev


_PAIR_FACTORS = {0: 1.0, 1: 0.5j, 2: -0.75}
_PAIR_POWERS = {0: -0.5, 1: -1.5, 2: -2.5}


def _pair_partial_sums(x: np.ndarray, counts: List[int], order: int = 0) -> np.ndarray:
    """
    合并项 c_k g(2k,x) - c_{k-1} g(2k-1,x) 的部分和（或其 order 阶导数）

    g(n,x) = √2·Re((2n - ix)^{-1/2})；返回形状 (len(counts), len(x))，
    第 i 行为前 counts[i] 个合并项之和。
    """
    n_pairs = max(counts)
    c, c_prev = _binomial_half(n_pairs)
    k = np.arange(1, n_pairs + 1, dtype=float)
    factor, power = _PAIR_FACTORS[order], _PAIR_POWERS[order]
    out = np.empty((len(counts), len(x)))
    columns = np.asarray(counts) - 1
    for start in range(0, len(x), _SERIES_CHUNK):
        xs = x[start:start + _SERIES_CHUNK, None]
        even = np.real(factor * (4.0 * k - 1j * xs) ** power)
        odd = np.real(factor * (4.0 * k - 2.0 - 1j * xs) ** power)
        pairs = math.sqrt(2.0) * (c * even - c_prev * odd)
        out[:, start:start + _SERIES_CHUNK] = np.cumsum(pairs, axis=1)[:, columns].T
    return out


def _leading_term(x: np.ndarray, order: int) -> np.ndarray:
    """|x|^{-1/2} 的 order 阶导数"""
    ax = np.abs(x)
    if order == 0:
        return ax ** -0.5
    if order == 1:
        return -0.5 * np.sign(x) * ax ** -1.5
    return 0.75 * ax ** -2.5


def _regular_whitham_series(x: np.ndarray, n_pairs: int, order: int = 0) -> np.ndarray:
    """√(2π)K_W - |x|^{-1/2} 的 order 阶导数：合并项之和，按对数 K, 2K, 4K 做 Richardson 外推"""
    out = np.zeros_like(x)
    near = np.abs(x) < EXPONENTIAL_CUT
    if np.any(near):
        partials = _pair_partial_sums(x[near], [n_pairs, 2 * n_pairs, 4 * n_pairs], order)
        out[near] = richardson_limit(2.0, list(partials))
    far = ~near
    out[far] = -_leading_term(x[far], order)
    return out


def kernel_whitham_series(x: ArrayLike, n_terms: int) -> ArrayLike:
    """
    K_W 的级数部分和：第 0 项为 (2π)^{-1/2}|x|^{-1/2}，其余 n_terms-1 项为
    n=2k-1 与 n=2k 两项合并后的合并项（单项级数只条件收敛，不提供）
    """
    if n_terms < 1:
        raise InvalidInput(f"n_terms 至少为1: {n_terms}")
    arr, scalar = _as_array(x)
    _check_floor(arr, "K_W")
    values = _leading_term(arr, 0)
    if n_terms > 1:
        values = values + _pair_partial_sums(arr, [n_terms - 1])[0]
    return _finish(values / math.sqrt(2.0 * math.pi), scalar)


def whitham_pair_terms(x: ArrayLike, n_pairs: int) -> np.ndarray:
    """单个合并项 (k = 1..n_pairs) 的值，形状 (n_pairs, len(x))"""
    arr, _ = _as_array(x)
    c, c_prev = _binomial_half(n_pairs)
    k = np.arange(1, n_pairs + 1, dtype=float)[:, None]
    even = np.real((4.0 * k - 1j * arr) ** -0.5)
    odd = np.real((4.0 * k - 2.0 - 1j * arr) ** -0.5)
    return math.sqrt(2.0) * (c[:, None] * even - c_prev[:, None] * odd) / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# 统一的求值接口
# ---------------------------------------------------------------------------

def _raw_kernel(spec: KernelSpec, x: np.ndarray, order: int = 0) -> np.ndarray:
    """未缩放核的 order 阶导数，不检查 x=0"""
    if spec.family == KernelFamily.WHITHAM:
        series = _regular_whitham_series(x, spec.series_terms, order)
        return (_leading_term(x, order) + series) / math.sqrt(2.0 * math.pi)
    if spec.family == KernelFamily.BIDIRECTIONAL:
        return (_bidirectional_raw, _bidirectional_derivative_raw, _bidirectional_second_raw)[order](x)
    ax = np.abs(x)
    if spec.family == KernelFamily.PURE_HOMOGENEOUS:
        s = spec.s
        if order == 0:
            return ax ** (s - 1.0)
        if order == 1:
            return (s - 1.0) * np.sign(x) * ax ** (s - 2.0)
        return (s - 1.0) * (s - 2.0) * ax ** (s - 3.0)
    if order == 0:
        return -np.log(ax)
    if order == 1:
        return -1.0 / x
    return 1.0 / (x * x)


def kernel_value(spec: KernelSpec, x: ArrayLike) -> ArrayLike:
    """未缩放的核 K(x)"""
    arr, scalar = _as_array(x)
    _check_floor(arr, spec.family.value)
    return _finish(_raw_kernel(spec, arr), scalar)


def normalized_kernel(spec: KernelSpec, x: ArrayLike) -> ArrayLike:
    """scale·K(x)，其奇异部分恰为 H 或 L"""
    arr, scalar = _as_array(x)
    _check_floor(arr, spec.family.value)
    return _finish(spec.scale * _raw_kernel(spec, arr), scalar)


def kernel_derivative(spec: KernelSpec, x: ArrayLike, order: int = 1) -> ArrayLike:
    """未缩放核的一阶或二阶导数"""
    if order not in (1, 2):
        raise InvalidInput(f"只支持一阶与二阶导数: {order}")
    arr, scalar = _as_array(x)
    _check_floor(arr, spec.family.value)
    return _finish(_raw_kernel(spec, arr, order), scalar)


def kernel_evaluator(spec: KernelSpec, normalized: bool = False, checked: bool = True) -> KernelEvaluator:
    """返回单参数求值函数；checked=False 时跳过 x=0 附近的检查（仅供求积内部使用）"""
    if checked:
        return partial(normalized_kernel if normalized else kernel_value, spec)
    factor = spec.scale if normalized else 1.0
    return lambda x: factor * _raw_kernel(spec, np.atleast_1d(np.asarray(x, dtype=float)))


# ---------------------------------------------------------------------------
# 差分
# ---------------------------------------------------------------------------

def second_difference(kernel: KernelEvaluator, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """δ²ₓK(y) = K(y+x) + K(y-x) - 2K(y)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.all(x == 0):
        return np.zeros(np.broadcast(x, y).shape) if np.ndim(y) else 0.0
    return kernel(y + x) + kernel(y - x) - 2.0 * kernel(y)


def first_central_difference(kernel: KernelEvaluator, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """δ₂ₓK(y) = K(y+x) - K(y-x)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.all(x == 0):
        return np.zeros(np.broadcast(x, y).shape) if np.ndim(y) else 0.0
    return kernel(y + x) - kernel(y - x)


# ---------------------------------------------------------------------------
# 数值反变换
# ---------------------------------------------------------------------------

def _whitham_symbol_remainder(xi: np.ndarray) -> np.ndarray:
    """ξ^{-1/2}(√tanh ξ - 1)"""
    log_tanh = np.log1p(-2.0 / (np.exp(2.0 * xi) + 1.0))
    return np.expm1(0.5 * log_tanh) / np.sqrt(xi)


def _bidirectional_symbol_remainder(xi: np.ndarray) -> np.ndarray:
    """tanh ξ/ξ - (1 - e^{-2ξ})/ξ = -tanh(ξ)e^{-2ξ}/ξ"""
    out = np.full_like(xi, -1.0)
    pos = xi > 0
    xp = xi[pos]
    out[pos] = -np.tanh(xp) * np.exp(-2.0 * xp) / xp
    return out


def kernel_numeric_from_symbol(spec: KernelSpec, x: float, cfg: Optional[QuadratureConfig] = None) -> float:
    """
    用反 Fourier 积分独立计算 K(x)：奇异部分解析给出，光滑余项在 [0, 20] 上求积

    Whitham: ξ^{-1/2} 部分给出 (2π)^{-1/2}|x|^{-1/2}；
    双向: (1 - e^{-2ξ})/ξ 部分给出 (1/π)log(√(4+x²)/|x|)。
    """
    x = abs(float(x))
    if x < KERNEL_FLOOR:
        raise DomainError(f"数值反变换在 |x| < {KERNEL_FLOOR:g} 处发散")
    cfg = cfg or QuadratureConfig()
    if spec.family == KernelFamily.PURE_HOMOGENEOUS:
        return x ** (spec.s - 1.0)
    if spec.family == KernelFamily.PURE_LOGARITHMIC:
        return -math.log(x)

    if spec.family == KernelFamily.WHITHAM:
        head = (2.0 * math.pi * x) ** -0.5
        integrand = lambda xi: _whitham_symbol_remainder(xi) * np.cos(xi * x)
        sings = [Singularity.algebraic(0.0, 0.5)]
    else:
        head = math.log(math.hypot(2.0, x) / x) / math.pi
        integrand = lambda xi: _bidirectional_symbol_remainder(xi) * np.cos(xi * x)
        sings = []
    oscillations = [p for p in np.arange(1.0, SYMBOL_CUT) * math.pi / max(x, 1.0) if p < SYMBOL_CUT]
    remainder = integrate_panel(integrand, 0.0, SYMBOL_CUT, sings, cfg, breakpoints=oscillations)
    return head + remainder.value / math.pi


def antiderivative_K(spec: KernelSpec, x: float, cfg: Optional[QuadratureConfig] = None) -> float:
    """𝒦(x) = ∫_0^x K；x 可取 math.inf"""
    if x < 0:
        raise InvalidInput(f"antiderivative_K 要求 x ≥ 0: {x}")
    if x == 0:
        return 0.0
    if spec.family == KernelFamily.PURE_HOMOGENEOUS:
        return x ** spec.s / spec.s
    if spec.family == KernelFamily.PURE_LOGARITHMIC:
        return x * (1.0 - math.log(x))
    cfg = cfg or QuadratureConfig()
    upper = min(float(x), EXPONENTIAL_CUT + 20.0)
    result = integrate_panel(
        kernel_evaluator(spec, checked=False), 0.0, upper, [kernel_singularity(spec, 0.0)], cfg,
        breakpoints=[p for p in (1.0, 4.0, 16.0) if p < upper],
    )
    return result.value


# ---------------------------------------------------------------------------
# 分解 K = S + R
# ---------------------------------------------------------------------------

def singular_part(spec: KernelSpec, x: ArrayLike) -> ArrayLike:
    """S(x)：齐次型 |x|^{s-1}，对数型 log(1/|x|)"""
    arr, scalar = _as_array(x)
    _check_floor(arr, "S")
    if spec.singular_kind == SingularKind.LOGARITHMIC:
        values = -np.log(np.abs(arr))
    else:
        values = np.abs(arr) ** (spec.singular_exponent - 1.0)
    return _finish(values, scalar)


def _bidirectional_regular(x: np.ndarray) -> np.ndarray:
    """πK_B - log(1/|x|) = log(4/π) + log(z coth z)，z = π|x|/4"""
    z = 0.25 * math.pi * np.abs(x)
    ratio = np.full_like(z, 2.0)
    pos = z > 0
    ratio[pos] = -np.expm1(-2.0 * z[pos]) / z[pos]
    return math.log(4.0 / math.pi) + np.log1p(np.exp(-2.0 * z)) - np.log(ratio)


def _bidirectional_regular_second(x: np.ndarray) -> np.ndarray:
    """(π/4)²[-1/z² + 4cosh 2z/sinh² 2z]，小 z 处用 2/3 - (14/15)z²"""
    z = 0.25 * math.pi * np.abs(x)
    out = np.empty_like(z)
    small = z < 1e-3
    zs = z[small]
    out[small] = 2.0 / 3.0 - 14.0 / 15.0 * zs ** 2
    zl = z[~small]
    q = np.exp(-4.0 * zl)
    out[~small] = -1.0 / zl ** 2 + 8.0 * np.exp(-2.0 * zl) * (1.0 + q) / np.expm1(-4.0 * zl) ** 2
    return (0.25 * math.pi) ** 2 * out


def _regular(spec: KernelSpec, x: np.ndarray, order: int = 0) -> np.ndarray:
    if spec.family == KernelFamily.WHITHAM:
        return _regular_whitham_series(x, spec.series_terms, order)
    if spec.family == KernelFamily.BIDIRECTIONAL:
        if order == 0:
            return _bidirectional_regular(x)
        if order == 2:
            return _bidirectional_regular_second(x)
        raise InvalidInput("双向核的正则部分只提供零阶与二阶")
    return np.zeros_like(x)


def regular_part(spec: KernelSpec, x: ArrayLike) -> ArrayLike:
    """R(x) = scale·K(x) - S(x)，在 x=0 处连续延拓"""
    arr, scalar = _as_array(x)
    return _finish(_regular(spec, arr), scalar)


def regular_second_derivative(spec: KernelSpec, x: ArrayLike) -> ArrayLike:
    """R''(x)"""
    arr, scalar = _as_array(x)
    return _finish(_regular(spec, arr, 2), scalar)


_TAIL_ORDERS = {KernelFamily.WHITHAM: 2.5, KernelFamily.BIDIRECTIONAL: 2.0}
_l1_lock = threading.Lock()
_l1_cache: Dict[Tuple[KernelFamily, int], float] = {}


def _regular_second_l1(spec: KernelSpec, cfg: QuadratureConfig) -> float:
    """‖R''‖_{L¹(ℝ)}，每个核族只计算一次"""
    if spec.is_pure:
        return 0.0
    key = (spec.family, spec.series_terms)
    with _l1_lock:
        if key not in _l1_cache:
            density = lambda x: np.abs(_regular(spec, x, 2))
            head = integrate_panel(density, 0.0, EXPONENTIAL_CUT, (), cfg,
                                   breakpoints=np.arange(0.5, EXPONENTIAL_CUT, 0.5))
            tail = integrate_tail(density, EXPONENTIAL_CUT, _TAIL_ORDERS[spec.family], cfg)
            _l1_cache[key] = 2.0 * (head + tail).value
            logger.info(f"{spec.family.value} 核 ‖R''‖_L1 = {_l1_cache[key]:.10g}")
    return _l1_cache[key]


@dataclass(frozen=True)
class KernelDecomposition:
    """K = S + R 分解；‖R''‖_{L¹} 在首次访问时计算并缓存"""
    spec: KernelSpec
    singular_kind: SingularKind
    cfg: QuadratureConfig = field(default_factory=QuadratureConfig)

    def regular_eval(self, x: ArrayLike) -> ArrayLike:
        return regular_part(self.spec, x)

    def singular_eval(self, x: ArrayLike) -> ArrayLike:
        return singular_part(self.spec, x)

    @property
    def regular_second_derivative_l1(self) -> float:
        return _regular_second_l1(self.spec, self.cfg)


def decompose(spec: KernelSpec, cfg: Optional[QuadratureConfig] = None) -> KernelDecomposition:
    """构造核的奇异/正则分解"""
    return KernelDecomposition(spec, spec.singular_kind, cfg or QuadratureConfig())


# ---------------------------------------------------------------------------
# 两条核估计
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    """不等式 lhs ≤ rhs 两端的独立数值"""
    name: str
    x: float
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def tail_bound_check(spec: KernelSpec, x: float, nu: float, cfg: Optional[QuadratureConfig] = None) -> BoundCheck:
    """0 ≤ ∫_ν^∞ δ²ₓK ≤ -K'(ν-x)x²，0 < x < ν"""
    if not 0 < x < nu:
        raise InvalidInput(f"需满足 0 < x < ν: x={x}, ν={nu}")
    cfg = cfg or QuadratureConfig()
    kernel = kernel_evaluator(spec, checked=False)
    difference = lambda y: second_difference(kernel, x, y)
    if spec.is_pure:
        order = 2.0 if spec.family == KernelFamily.PURE_LOGARITHMIC else 3.0 - spec.s
        lhs = integrate_tail(difference, nu, order, cfg)
    else:
        lhs = integrate_panel(difference, nu, nu + EXPONENTIAL_CUT + 20.0, (), cfg,
                              breakpoints=[nu + 2.0 ** j for j in range(7)])
    rhs = -float(_raw_kernel(spec, np.array([nu - x]), 1)[0]) * x * x
    return BoundCheck(f"tail_bound_x{x:g}_nu{nu:g}", x, lhs.value, rhs)


def remainder_bound_check(spec: KernelSpec, x: float, cfg: Optional[QuadratureConfig] = None) -> BoundCheck:
    """‖δ²ₓR‖_{L¹} ≤ x²‖R''‖_{L¹}"""
    if not x > 0:
        raise InvalidInput(f"x 必须大于0: {x}")
    if spec.is_pure:
        return BoundCheck(f"remainder_bound_x{x:g}", x, 0.0, 0.0)
    cfg = cfg or QuadratureConfig()
    regular = lambda y: _regular(spec, np.asarray(y, dtype=float))
    density = lambda y: np.abs(second_difference(regular, x, y))
    split = 2.0 * x + 2.0
    head = integrate_panel(density, 0.0, split, (), cfg, breakpoints=[x, 0.5 * x, 1.5 * x])
    if split < EXPONENTIAL_CUT + x:
        head = head + integrate_panel(density, split, EXPONENTIAL_CUT + x, (), cfg,
                                      breakpoints=np.arange(split + 1.0, EXPONENTIAL_CUT + x, 1.0))
        split = EXPONENTIAL_CUT + x
    tail = integrate_tail(density, split, _TAIL_ORDERS[spec.family], cfg)
    lhs = 2.0 * (head + tail).value
    rhs = x * x * _regular_second_l1(spec, cfg)
    return BoundCheck(f"remainder_bound_x{x:g}", x, lhs, rhs)


# ---------------------------------------------------------------------------
# 汇总
# ---------------------------------------------------------------------------

def kernel_table(spec: KernelSpec, xs: np.ndarray, cfg: Optional[QuadratureConfig] = None) -> Dict[str, np.ndarray]:
    """CLI `kernel` 子命令的列：x, K_closed, K_series, K_numeric, S, R, abs_err"""
    cfg = cfg or QuadratureConfig()
    xs = np.asarray(xs, dtype=float)
    numeric = np.array([kernel_numeric_from_symbol(spec, x, cfg) for x in xs])
    values = kernel_value(spec, xs)
    if spec.family == KernelFamily.BIDIRECTIONAL:
        closed, series = values, np.full_like(xs, np.nan)
    elif spec.family == KernelFamily.WHITHAM:
        closed, series = np.full_like(xs, np.nan), values
    else:
        closed, series = values, np.full_like(xs, np.nan)
    compared = series if spec.family == KernelFamily.WHITHAM else closed
    return {
        "x": xs,
        "K_closed": closed,
        "K_series": series,
        "K_numeric": numeric,
        "S": singular_part(spec, xs),
        "R": regular_part(spec, xs),
        "abs_err": np.abs(compared - numeric),
    }


def _bound_pairs(count: int = 20) -> List[Tuple[float, float]]:
    xs = np.geomspace(0.01, 0.5, count // 2)
    pairs = [(float(x), float(2.0 * x)) for x in xs]
    pairs += [(float(x), float(x + 1.0)) for x in xs]
    return pairs


def run_kernel_suite(cfg: Optional[QuadratureConfig] = None) -> List[IdentityReport]:
    """核的数值核对：级数与闭式对数值反变换、双向核的对数极限、两条核估计"""
    cfg = cfg or QuadratureConfig()
    whitham = KernelSpec.whitham()
    bidirectional = KernelSpec.bidirectional()
    xs = np.geomspace(0.1, 5.0, 12)

    def _max_relative(spec: KernelSpec) -> float:
        numeric = np.array([kernel_numeric_from_symbol(spec, x, cfg) for x in xs])
        return float(np.max(np.abs(kernel_value(spec, xs) / numeric - 1.0)))

    reports = [
        IdentityReport("whitham_series_vs_numeric", _max_relative(whitham), (-math.inf, 1e-6)),
        IdentityReport("bidirectional_closed_vs_numeric", _max_relative(bidirectional), (-math.inf, 1e-6)),
        IdentityReport(
            "bidirectional_log_limit",
            normalized_kernel(bidirectional, 1e-5) - math.log(1e5),
            math.log(4.0 / math.pi), 1e-4,
        ),
    ]
    for spec in (whitham, bidirectional):
        tails = [tail_bound_check(spec, x, nu, cfg) for x, nu in _bound_pairs()]
        remainders = [remainder_bound_check(spec, x, cfg) for x, _ in _bound_pairs()[:10]]
        reports.append(IdentityReport(f"{spec.family.value}_tail_bound_min_margin",
                                      min(b.margin for b in tails), (-1e-12, math.inf)))
        reports.append(IdentityReport(f"{spec.family.value}_tail_nonnegative_min",
                                      min(b.lhs for b in tails), (-1e-12, math.inf)))
        reports.append(IdentityReport(f"{spec.family.value}_remainder_bound_min_margin",
                                      min(b.margin for b in remainders), (-1e-12, math.inf),
                                      note=f"‖R''‖_L1 = {decompose(spec, cfg).regular_second_derivative_l1:.6g}"))
    logger.info(f"核核对完成: {sum(r.passed for r in reports)}/{len(reports)} 通过")
    return reports
