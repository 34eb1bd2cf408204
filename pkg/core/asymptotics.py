"""
波峰渐近分析

把求解器给出的近最高波变换为重标度变量 u（u(0)=0，u ≥ 0），
在波峰附近的窗口上拟合 u/x^{1/2}、u/(x log(1/x)) 及其导数形式的极限，
并检验 Hölder-1/2 与 log-Lipschitz 正则性。
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import AsymptoticsConfig
from core.errors import InvalidInput, NotHighest, WindowTooSmall
from core.kernels import KernelSpec
from core.special_functions import IdentityReport
from core.wave_solver import WaveFamily, WaveProfile, fourier_decay_slope, modes_to_grid, spectral_derivative
from utils.extrapolation import limit

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
SQRT3 = math.sqrt(3.0)


class Quantity(str, Enum):
    """拟合的商"""
    VALUE_HOMOGENEOUS = "u/x^(1/2)"
    VALUE_LOGARITHMIC = "u/(x*log(1/x))"
    DERIVATIVE_HOMOGENEOUS = "u'*x^(1/2)"
    DERIVATIVE_LOGARITHMIC = "u'/log(1/x)"

    @property
    def is_derivative(self) -> bool:
        return self in (Quantity.DERIVATIVE_HOMOGENEOUS, Quantity.DERIVATIVE_LOGARITHMIC)

    @property
    def is_logarithmic(self) -> bool:
        return self in (Quantity.VALUE_LOGARITHMIC, Quantity.DERIVATIVE_LOGARITHMIC)

    def quotient(self, x: np.ndarray, samples: np.ndarray) -> np.ndarray:
        if self == Quantity.VALUE_HOMOGENEOUS:
            return samples / np.sqrt(x)
        if self == Quantity.VALUE_LOGARITHMIC:
            return samples / (x * np.log(1.0 / x))
        if self == Quantity.DERIVATIVE_HOMOGENEOUS:
            return samples * np.sqrt(x)
        return samples / np.log(1.0 / x)

    def small_parameter(self, x: np.ndarray) -> np.ndarray:
        """外推所用的小参数：齐次型 x^{1/2}，对数型 1/log(1/x)"""
        return 1.0 / np.log(1.0 / x) if self.is_logarithmic else np.sqrt(x)


TARGETS = {
    Quantity.VALUE_HOMOGENEOUS: math.pi / 2.0,
    Quantity.VALUE_LOGARITHMIC: 0.5,
    Quantity.DERIVATIVE_HOMOGENEOUS: math.pi / 4.0,
    Quantity.DERIVATIVE_LOGARITHMIC: 0.5,
}


@dataclass
class RescaledProfile:
    """
    波峰相对的重标度变量 u

    u 满足 λu + qu² + κu³ = ∫_0^∞ δ²ₓK(y)u(y)dy，K 为 kernel 缩放后的核。
    恰为最高波时 λ = 0、q = 1，κ 为零（Whitham）或 2/(3πc²)（双向）。
    """
    family: WaveFamily
    period: float
    speed_c: float
    u_modes: np.ndarray
    linear: float
    quadratic: float
    cubic: float
    kernel: KernelSpec

    @property
    def n_modes(self) -> int:
        return len(self.u_modes) - 1

    @property
    def spacing(self) -> float:
        return self.period / (2 * self.n_modes)

    @property
    def periodic_values(self) -> np.ndarray:
        """一个周期 2N 点网格上的 u"""
        return modes_to_grid(self.u_modes)

    @property
    def x(self) -> np.ndarray:
        """(0, P/2] 上的网格点"""
        return self.spacing * np.arange(1, self.n_modes + 1)

    @property
    def u_values(self) -> np.ndarray:
        return self.periodic_values[1:self.n_modes + 1]

    @property
    def u_prime(self) -> np.ndarray:
        derivative = spectral_derivative(
            WaveProfile(self.family, self.u_modes, self.speed_c, self.period, variable="u")
        )
        return derivative[1:self.n_modes + 1]

    def n(self, t: np.ndarray) -> np.ndarray:
        """(1+n(u))u² 中的 n；λ = 0、q = 1 时即 κu"""
        return (self.quadratic - 1.0) + self.cubic * np.asarray(t, dtype=float)

    def left_side(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.linear * t + self.quadratic * t * t + self.cubic * t ** 3

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        """任意点处的 u（余弦级数，偶延拓与周期延拓自动成立）"""
        profile = WaveProfile(self.family, self.u_modes, self.speed_c, self.period, variable="u")
        return profile.evaluate(y)


def rescale(profile: WaveProfile, max_gap: Optional[float] = None) -> RescaledProfile:
    """
    Whitham: u = √(2π)(φ(0) - φ)；双向: u = (√3πc/2)(v(0) - v)

    Raises:
        NotHighest: 波峰间隙超过 max_gap
        InvalidInput: 双向方程给的是 φ 而非 v
    """
    gap = profile.gap
    if max_gap is not None and gap > max_gap:
        raise NotHighest(f"波峰间隙 {gap:.3e} 超过 {max_gap:.3e}，不是近最高波")
    if gap < -1e-12:
        raise NotHighest(f"波峰高度超过最大高度 {-gap:.3e}")
    c = profile.speed_c
    crest = profile.crest_height

    if profile.family == WaveFamily.WHITHAM:
        scale = SQRT_2PI
        linear = SQRT_2PI * (c - 2.0 * crest)
        quadratic, cubic = 1.0, 0.0
    else:
        if profile.variable != "v":
            raise InvalidInput("双向方程的重标度需要速度变量 v")
        scale = 0.5 * SQRT3 * math.pi * c
        slope = c * c - 3.0 * c * crest + 1.5 * crest * crest
        linear = math.pi * slope
        quadratic = 1.5 * math.pi * (c - crest) / scale
        cubic = 0.5 * math.pi / scale ** 2

    u_modes = -scale * profile.modes
    u_modes[0] += scale * crest
    return RescaledProfile(
        family=profile.family,
        period=profile.period,
        speed_c=c,
        u_modes=u_modes,
        linear=linear,
        quadratic=quadratic,
        cubic=cubic,
        kernel=profile.family.kernel,
    )


def is_increasing(r: RescaledProfile, nu: float) -> bool:
    """u 在 (0, ν] 的网格点上单调递增"""
    x = r.x
    values = r.u_values[x <= nu]
    return bool(values[0] > 0 and np.all(np.diff(values) > 0))


# ---------------------------------------------------------------------------
# 极限拟合
# ---------------------------------------------------------------------------

@dataclass
class AsymptoticFit:
    """一个商在窗口上的外推极限"""
    quantity: Quantity
    window: Tuple[float, float]
    x: np.ndarray
    raw_values: np.ndarray
    extrapolated: float
    uncertainty: float
    misfit: float

    @property
    def target(self) -> float:
        return TARGETS[self.quantity]

    @property
    def raw_at_window_start(self) -> float:
        return float(self.raw_values[0])

    @property
    def sandwiched(self) -> bool:
        """窗口内商的最小值与最大值夹住外推值（只作诊断）"""
        return bool(np.min(self.raw_values) <= self.extrapolated <= np.max(self.raw_values))

    def relative_error(self, target: Optional[float] = None) -> float:
        target = self.target if target is None else target
        return abs(self.extrapolated - target) / abs(target)


def _window_fit(quantity: Quantity, x: np.ndarray, samples: np.ndarray) -> Tuple[float, float]:
    quotient = quantity.quotient(x, samples)
    return limit(quantity.small_parameter(x), quotient, n_terms=3)


def fit_quotient(x: np.ndarray, samples: np.ndarray, quantity: Quantity,
                 window: Tuple[float, float], cfg: Optional[AsymptoticsConfig] = None) -> AsymptoticFit:
    """
    在窗口 [x_min, x_max] 上拟合 quantity 的极限

    主窗口之外再用 x_max/2、x_max/4 两个嵌套窗口重拟合，
    不确定度取三者外推值极差的一半（样本不足的嵌套窗口跳过）。

    Raises:
        WindowTooSmall: 主窗口样本数少于 min_samples
    """
    cfg = cfg or AsymptoticsConfig()
    quantity = Quantity(quantity)
    x = np.asarray(x, dtype=float)
    samples = np.asarray(samples, dtype=float)
    x_min, x_max = window
    if not 0 < x_min < x_max:
        raise InvalidInput(f"拟合窗口无效: [{x_min}, {x_max}]")
    if quantity.is_logarithmic and x_max >= 1.0:
        raise InvalidInput(f"对数型商要求 x_max < 1: {x_max}")

    mask = (x >= x_min) & (x <= x_max)
    if np.count_nonzero(mask) < cfg.min_samples:
        raise WindowTooSmall(
            f"窗口 [{x_min:.3e}, {x_max:.3e}] 内只有 {np.count_nonzero(mask)} 个样本，至少需要 {cfg.min_samples}"
        )
    extrapolated, misfit = _window_fit(quantity, x[mask], samples[mask])

    estimates = [extrapolated]
    for shrink in (2.0, 4.0):
        nested = (x >= x_min) & (x <= x_max / shrink)
        if np.count_nonzero(nested) >= cfg.min_samples:
            estimates.append(_window_fit(quantity, x[nested], samples[nested])[0])
    uncertainty = 0.5 * (max(estimates) - min(estimates))

    fit = AsymptoticFit(
        quantity=quantity,
        window=(float(x_min), float(x_max)),
        x=x[mask],
        raw_values=quantity.quotient(x[mask], samples[mask]),
        extrapolated=float(extrapolated),
        uncertainty=float(uncertainty),
        misfit=float(misfit),
    )
    logger.debug(
        f"{quantity.value} 窗口 [{x_min:.3e}, {x_max:.3e}] ({np.count_nonzero(mask)} 点): "
        f"外推 {fit.extrapolated:.8f} ± {fit.uncertainty:.1e}，夹逼 {fit.sandwiched}"
    )
    return fit


def default_window(r: RescaledProfile, quantity: Quantity, cfg: AsymptoticsConfig,
                   nu: Optional[float] = None) -> Tuple[float, float]:
    """x_min 为 min_cells（导数为 derivative_min_cells）个网格间距，x_max 为 ν"""
    cells = cfg.derivative_min_cells if Quantity(quantity).is_derivative else cfg.min_cells
    nu = cfg.nu_fraction * r.period if nu is None else nu
    if Quantity(quantity).is_logarithmic:
        nu = min(nu, 0.5)
    return cells * r.spacing, nu


def fit_limit(r: RescaledProfile, quantity: Quantity, window: Optional[Tuple[float, float]] = None,
              cfg: Optional[AsymptoticsConfig] = None) -> AsymptoticFit:
    """在求解器输出上拟合 quantity 的极限"""
    cfg = cfg or AsymptoticsConfig()
    quantity = Quantity(quantity)
    window = window or default_window(r, quantity, cfg)
    samples = r.u_prime if quantity.is_derivative else r.u_values
    return fit_quotient(r.x, samples, quantity, window, cfg)


def value_quantity(family: WaveFamily) -> Quantity:
    return Quantity.VALUE_HOMOGENEOUS if WaveFamily(family) == WaveFamily.WHITHAM else Quantity.VALUE_LOGARITHMIC


def derivative_quantity(family: WaveFamily) -> Quantity:
    if WaveFamily(family) == WaveFamily.WHITHAM:
        return Quantity.DERIVATIVE_HOMOGENEOUS
    return Quantity.DERIVATIVE_LOGARITHMIC


def derivative_limits(r: RescaledProfile, cfg: Optional[AsymptoticsConfig] = None) -> AsymptoticFit:
    """u'x^{1/2} → π/4（Whitham）或 u'/log(1/x) → 1/2（双向）"""
    return fit_limit(r, derivative_quantity(r.family), cfg=cfg)


def corollary_factor(family: WaveFamily, level: str = "phi", speed_c: Optional[float] = None) -> float:
    """
    u 的极限到原变量常数的换算因子

    Whitham: (φ(0)-φ)/x^{1/2} 的极限 = value/√(2π)；
    双向: φ 层 (φ(0)-φ)/(x log(1/x)) 的极限 = 2·value/(3π)，
          v 层 = 2·value/(√3πc)。
    """
    family = WaveFamily(family)
    if family == WaveFamily.WHITHAM:
        return 1.0 / SQRT_2PI
    if level == "phi":
        return 2.0 / (3.0 * math.pi)
    if level == "v":
        if speed_c is None or not speed_c > 0:
            raise InvalidInput("v 层常数需要正的波速 c")
        return 2.0 / (SQRT3 * math.pi * speed_c)
    raise InvalidInput(f"未知的变量层: {level}")


def corollary_constants(fit: Union[AsymptoticFit, float], family: WaveFamily, level: str = "phi",
                        speed_c: Optional[float] = None) -> float:
    """把值极限（拟合结果或数值）换回原变量常数"""
    value = fit.extrapolated if isinstance(fit, AsymptoticFit) else float(fit)
    return value * corollary_factor(family, level, speed_c)


def corollary_uncertainty(fit: AsymptoticFit, family: WaveFamily, level: str = "phi",
                          speed_c: Optional[float] = None) -> float:
    """拟合不确定度按同一因子换算"""
    return fit.uncertainty * abs(corollary_factor(family, level, speed_c))


def corollary_target(family: WaveFamily) -> float:
    """√(π/8) 或 1/(3π)"""
    return math.sqrt(math.pi / 8.0) if WaveFamily(family) == WaveFamily.WHITHAM else 1.0 / (3.0 * math.pi)


def nu_sensitivity(r: RescaledProfile, quantity: Quantity, nus: Sequence[float],
                   cfg: Optional[AsymptoticsConfig] = None) -> Dict[float, float]:
    """对若干窗口上限 ν 重新拟合，返回 ν → 外推值"""
    cfg = cfg or AsymptoticsConfig()
    out = {}
    for nu in nus:
        window = default_window(r, quantity, cfg, nu=nu)
        try:
            out[float(nu)] = fit_limit(r, quantity, window, cfg).extrapolated
        except WindowTooSmall:
            logger.warning(f"ν = {nu} 的窗口样本不足，跳过")
    return out


# ---------------------------------------------------------------------------
# 正则性
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeminormResult:
    """上确界及其取到的位置"""
    value: float
    x: float
    h: float


def _log_indices(upper: int, count: int) -> np.ndarray:
    if upper < 1:
        return np.array([], dtype=int)
    return np.unique(np.round(np.geomspace(1, upper, count)).astype(int))


def holder_seminorm_from_samples(values: np.ndarray, spacing: float, nu: float,
                                 samples: int = 160) -> SeminormResult:
    """
    sup x^{1/2}(u(x+h) - u(x-h))/h，0 < h < x ≤ ν

    values 为从 x=0 开始、间距 spacing 的均匀样本，至少覆盖 [0, 2ν]。
    """
    values = np.asarray(values, dtype=float)
    top = int(math.floor(nu / spacing + 1e-9))
    if 2 * top >= len(values):
        raise InvalidInput("样本没有覆盖 [0, 2ν]")
    best = SeminormResult(-math.inf, math.nan, math.nan)
    for i in _log_indices(top, samples):
        offsets = _log_indices(i - 1, max(8, samples // 4))
        if len(offsets) == 0:
            continue
        x = i * spacing
        h = offsets * spacing
        quotients = math.sqrt(x) * (values[i + offsets] - values[i - offsets]) / h
        j = int(np.argmax(np.abs(quotients)))
        if abs(quotients[j]) > best.value:
            best = SeminormResult(float(abs(quotients[j])), float(x), float(h[j]))
    return best


def holder_seminorm(r: RescaledProfile, cfg: Optional[AsymptoticsConfig] = None) -> SeminormResult:
    """求解器输出上的加强 Hölder 商"""
    cfg = cfg or AsymptoticsConfig()
    nu = cfg.nu_fraction * r.period
    periodic = r.periodic_values
    count = int(math.floor(2.0 * nu / r.spacing)) + 2
    extended = periodic[np.arange(count) % len(periodic)]
    result = holder_seminorm_from_samples(extended, r.spacing, nu, cfg.holder_samples)
    logger.debug(f"Hölder 商上确界 {result.value:.6g}，取于 x = {result.x:.3e}, h = {result.h:.3e}")
    return result


def log_modulus(t: np.ndarray) -> np.ndarray:
    """ω(t) = t log(1 + 1/t)"""
    t = np.asarray(t, dtype=float)
    return t * np.log1p(1.0 / t)


def log_modulus_derivative(t: np.ndarray) -> np.ndarray:
    """ω'(t) = log(1 + 1/t) - 1/(1+t)"""
    t = np.asarray(t, dtype=float)
    return np.log1p(1.0 / t) - 1.0 / (1.0 + t)


def _pair_scan(values: np.ndarray, spacing: float, offsets: np.ndarray, positions: np.ndarray,
               periodic: bool) -> float:
    n = len(values)
    best = 0.0
    for d in offsets:
        if periodic:
            partners = (positions + d) % n
            starts = positions
        else:
            starts = positions[positions + d < n]
            partners = starts + d
        if len(starts) == 0:
            continue
        ratio = np.max(np.abs(values[partners] - values[starts])) / log_modulus(d * spacing)
        best = max(best, float(ratio))
    return best


def log_lipschitz_constant(profile: WaveProfile, cfg: Optional[AsymptoticsConfig] = None) -> float:
    """
    满足 |f(x)-f(y)| ≤ Mω(|x-y|) 的最小 M 的采样估计

    偏移按对数取样到半个周期；起点取确定步长的子网格，再加上波峰邻域的全部点，
    总对数控制在 pair_budget 左右。
    """
    cfg = cfg or AsymptoticsConfig()
    values = profile.grid_values
    n = len(values)
    spacing = profile.period / n
    offsets = _log_indices(n // 2, 200)
    per_offset = max(1, cfg.pair_budget // max(len(offsets), 1))
    stride = max(1, n // per_offset)
    crest = np.arange(-min(n // 8, per_offset // 2), min(n // 8, per_offset // 2) + 1) % n
    positions = np.unique(np.concatenate((np.arange(0, n, stride), crest)))
    constant = _pair_scan(values, spacing, offsets, positions, periodic=True)
    logger.debug(f"log-Lipschitz 常数 {constant:.6g}（{len(offsets)} 个偏移 × {len(positions)} 个起点）")
    return constant


def log_lipschitz_from_samples(x: np.ndarray, values: np.ndarray, period: Optional[float] = None,
                               budget: int = 1_000_000) -> float:
    """均匀样本上的 log-Lipschitz 常数；period 给定时按周期处理"""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(x) != len(values) or len(x) < 2:
        raise InvalidInput("x 与 values 必须是等长且至少两个点的数组")
    spacing = float(x[1] - x[0])
    n = len(values)
    top = n // 2 if period is not None else n - 1
    offsets = np.unique(np.concatenate((_log_indices(top, 200), [top])))
    stride = max(1, n * len(offsets) // budget)
    positions = np.arange(0, n, stride)
    return _pair_scan(values, spacing, offsets, positions, periodic=period is not None)


def crest_modulus_ratio(profile: WaveProfile, window: float, skip_cells: int = 8) -> float:
    """波峰附近 max |f'(x)|/ω'(x)，x ∈ [skip_cells·h, window]"""
    derivative = spectral_derivative(profile)
    n = profile.n_modes
    spacing = profile.period / (2 * n)
    x = spacing * np.arange(1, n + 1)
    mask = (x >= skip_cells * spacing) & (x <= window)
    if not np.any(mask):
        raise WindowTooSmall(f"窗口 {window} 内没有可用网格点")
    return float(np.max(np.abs(derivative[1:n + 1][mask]) / log_modulus_derivative(x[mask])))


def summarize_fits(fits: List[AsymptoticFit]) -> List[Dict]:
    """拟合结果的表格行"""
    return [
        {
            "quantity": fit.quantity.value,
            "window": f"[{fit.window[0]:.6g}, {fit.window[1]:.6g}]",
            "raw": fit.raw_at_window_start,
            "extrapolated": fit.extrapolated,
            "uncertainty": fit.uncertainty,
            "target": fit.target,
            "sandwiched": fit.sandwiched,
        }
        for fit in fits
    ]


# 相对容差：值极限、导数极限、原变量常数
RELATIVE_TOLERANCES = {
    WaveFamily.WHITHAM: (0.02, 0.03, 0.02),
    WaveFamily.BIDIRECTIONAL: (0.05, 0.07, 0.05),
}
DECAY_SLOPE_RANGE = (-1.7, -1.3)


def _fit_report(fit: AsymptoticFit, tolerance: float) -> IdentityReport:
    return IdentityReport(
        name=f"limit {fit.quantity.value}",
        computed=fit.extrapolated,
        expected=fit.target,
        tolerance=tolerance * abs(fit.target),
        note=(
            f"window [{fit.window[0]:.4g}, {fit.window[1]:.4g}], raw {fit.raw_at_window_start:.6f}, "
            f"uncertainty {fit.uncertainty:.1e}, sandwiched {fit.sandwiched}"
        ),
    )


def asymptotic_reports(profile: WaveProfile, cfg: Optional[AsymptoticsConfig] = None,
                       max_gap: Optional[float] = None) -> List[IdentityReport]:
    """
    近最高波的全部波峰渐近核对

    两族都给出值极限、导数极限、原变量常数与单调性；Whitham 另给 Fourier 衰减斜率和
    Hölder 商，双向方程另给 log-Lipschitz 常数。

    Raises:
        NotHighest: 波峰间隙超过 max_gap
        WindowTooSmall: 网格过粗，窗口样本不足
    """
    cfg = cfg or AsymptoticsConfig()
    r = rescale(profile, max_gap)
    value_tol, derivative_tol, constant_tol = RELATIVE_TOLERANCES[r.family]
    value = fit_limit(r, value_quantity(r.family), cfg=cfg)
    derivative = derivative_limits(r, cfg)
    constant = corollary_constants(value, r.family, "phi", r.speed_c)
    constant_error = corollary_uncertainty(value, r.family, "phi", r.speed_c)
    target = corollary_target(r.family)
    nu = cfg.nu_fraction * r.period

    reports = [
        _fit_report(value, value_tol),
        _fit_report(derivative, derivative_tol),
        IdentityReport("crest_constant_phi", constant, target, constant_tol * target,
                       note=f"± {constant_error:.2e}, gap {profile.gap:.3e}, N = {profile.n_modes}"),
        IdentityReport("u_increasing_near_crest", float(is_increasing(r, nu)), 1.0),
    ]
    if r.family == WaveFamily.WHITHAM:
        holder = holder_seminorm(r, cfg)
        reports.append(IdentityReport("fourier_decay_slope", fourier_decay_slope(profile), DECAY_SLOPE_RANGE))
        reports.append(IdentityReport("holder_seminorm", holder.value, (0.0, math.inf),
                                      note=f"attained at x = {holder.x:.4g}, h = {holder.h:.4g}"))
    else:
        constant_v = corollary_constants(value, r.family, "v", r.speed_c)
        ratio = crest_modulus_ratio(profile, nu, cfg.derivative_min_cells)
        reports.append(IdentityReport("log_lipschitz_constant", log_lipschitz_constant(profile, cfg), (0.0, math.inf),
                                      note=f"crest modulus ratio {ratio:.6g}, v-level constant {constant_v:.6g}"))
    for report in reports:
        logger.info(f"{report.name}: {report.computed:.8g} ({'PASS' if report.passed else 'FAIL'})")
    return reports
