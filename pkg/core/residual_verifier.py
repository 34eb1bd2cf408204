"""
压缩方程残差校验

用奇异求积直接计算 ∫_0^∞ δ²ₓK(y)u(y)dy，独立于求解器检验：
- 求解器输出的 u 满足压缩方程
- 玩具方程的显式解 β_s|x|^s 精确成立
- 对称差分形式的恒等式
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence

import numpy as np

from config import QuadratureConfig, VerifierConfig
from core.asymptotics import RescaledProfile
from core.errors import InvalidInput
from core.kernels import (
    KernelSpec,
    kernel_derivative,
    kernel_evaluator,
    kernel_singularity,
    first_central_difference,
    second_difference,
)
from core.quadrature import Singularity, integrate_panel, integrate_tail
from core.special_functions import beta_s, tau0
from core.wave_solver import WaveFamily
from utils.parallel_utils import parallel_map

logger = logging.getLogger(__name__)


@dataclass
class ResidualReport:
    """单个采样点上的残差"""
    x: float
    u: float
    lhs: float
    rhs: float
    tail_bound: float
    quad_error: float
    threshold: float
    residual: float = field(init=False)
    relative: float = field(init=False)

    def __post_init__(self):
        self.residual = self.lhs - self.rhs
        scale = self.u * self.u
        if scale > 0:
            self.relative = abs(self.residual) / scale
        else:
            self.relative = 0.0 if self.residual == 0 else math.inf

    @property
    def passed(self) -> bool:
        budget = self.threshold * self.u * self.u
        return self.relative <= self.threshold and self.tail_bound <= max(budget, self.threshold * 1e-12)

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["passed"] = self.passed
        return data


@dataclass(frozen=True)
class SymmetrisedCheck:
    """N(u(x+h)) - N(u(x-h)) 与 -∫δ₂ₕK·δ₂ₓu 的比较"""
    x: float
    h: float
    lhs: float
    rhs: float

    @property
    def difference(self) -> float:
        return self.lhs - self.rhs

    @property
    def relative(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.difference) / scale if scale > 0 else 0.0


def _profile_singularity(family: WaveFamily, location: float) -> Singularity:
    """u 在波峰处的尖点：Whitham 为平方根型，双向为 x log(1/x) 型"""
    if family == WaveFamily.WHITHAM:
        return Singularity.algebraic(location, 0.5)
    return Singularity.logarithmic(location)


def _tail_bound(spec: KernelSpec, x: float, cut: float, sup_u: float) -> float:
    """(cut, ∞) 上非负贡献的上界 -K'(cut-x)·x²·sup u"""
    slope = spec.scale * float(kernel_derivative(spec, cut - x))
    return max(0.0, -slope) * x * x * sup_u


def condensed_residual(
    r: RescaledProfile,
    x: float,
    spec: Optional[KernelSpec] = None,
    cfg: Optional[VerifierConfig] = None,
    quad: Optional[QuadratureConfig] = None,
) -> ResidualReport:
    """
    (1+n(u(x)))u(x)² - ∫_0^∞ δ²ₓK(y)u(y)dy

    u 按偶周期延拓；积分在 [0, periods·P] 上做奇异求积，
    切分点取 τ₀x、2x、ν 及各波峰，其后的尾部只给出解析上界。

    Raises:
        InvalidInput: x 不在 (0, P/2) 内
        NonConvergent: 求积未收敛
    """
    cfg = cfg or VerifierConfig()
    spec = spec or r.kernel
    quad_cfg = cfg.quadrature(quad or QuadratureConfig())
    period = r.period
    if not 0 < x < 0.5 * period:
        raise InvalidInput(f"采样点必须在 (0, P/2) 内: {x}")

    kernel = kernel_evaluator(spec, normalized=True, checked=False)
    integrand = lambda y: second_difference(kernel, x, y) * r.evaluate(y)

    cut = cfg.periods * period
    crests = [k * period for k in range(1, cfg.periods + 1)]
    sings = [kernel_singularity(spec, 0.0), kernel_singularity(spec, x)]
    sings += [_profile_singularity(r.family, c) for c in crests]
    breakpoints = [tau0() * x, 2.0 * x, 0.125 * period, 0.5 * period]
    breakpoints += [c + 0.5 * period for c in crests[:-1]]
    result = integrate_panel(integrand, 0.0, cut, sings, quad_cfg, breakpoints=breakpoints)

    u_x = float(r.evaluate(np.array([x]))[0])
    sup_u = float(np.max(r.periodic_values))
    report = ResidualReport(
        x=float(x),
        u=u_x,
        lhs=float(r.left_side(u_x)),
        rhs=result.value,
        tail_bound=_tail_bound(spec, x, cut, sup_u),
        quad_error=result.error,
        threshold=cfg.threshold,
    )
    logger.debug(
        f"x = {x:.6g}: 左端 {report.lhs:.12g}，积分 {report.rhs:.12g}，相对残差 {report.relative:.3e}"
    )
    return report


def toy_residual(s: float, x: float, quad: Optional[QuadratureConfig] = None,
                 threshold: float = 1e-7) -> ResidualReport:
    """
    u = β_s|x|^s 在 u² = ∫_0^∞ δ²ₓH_s(y)u(y)dy 中的残差

    Raises:
        InvalidInput: s 不在 (0,1) 内或 x <= 0
    """
    if not 0 < s < 1:
        raise InvalidInput(f"s 必须在 (0,1) 内: {s}")
    if not x > 0:
        raise InvalidInput(f"x 必须大于0: {x}")
    quad = quad or QuadratureConfig()
    spec = KernelSpec.homogeneous(s)
    b = beta_s(s)
    kernel = kernel_evaluator(spec, normalized=True, checked=False)
    integrand = lambda y: second_difference(kernel, x, y) * b * np.abs(y) ** s

    head = integrate_panel(
        integrand, 0.0, 2.0 * x,
        [Singularity.algebraic(0.0, s), Singularity.algebraic(x, s)],
        quad,
    )
    tail = integrate_tail(integrand, 2.0 * x, 3.0 - 2.0 * s, quad)
    total = head + tail
    u_x = b * x ** s
    return ResidualReport(
        x=float(x),
        u=u_x,
        lhs=u_x * u_x,
        rhs=total.value,
        tail_bound=0.0,
        quad_error=total.error,
        threshold=threshold,
    )


def symmetrised_difference_check(
    r: RescaledProfile,
    x: float,
    h: float,
    spec: Optional[KernelSpec] = None,
    cfg: Optional[VerifierConfig] = None,
    quad: Optional[QuadratureConfig] = None,
) -> SymmetrisedCheck:
    """
    N(u(x+h)) - N(u(x-h)) = -∫_0^∞ δ₂ₕK(y)·δ₂ₓu(y)dy，N 为压缩方程左端

    Raises:
        InvalidInput: 不满足 0 < h < x 且 x + h < P/2
    """
    cfg = cfg or VerifierConfig()
    spec = spec or r.kernel
    quad_cfg = cfg.quadrature(quad or QuadratureConfig())
    period = r.period
    if not (0 < h < x and x + h < 0.5 * period):
        raise InvalidInput(f"需要 0 < h < x 且 x + h < P/2: x={x}, h={h}")

    kernel = kernel_evaluator(spec, normalized=True, checked=False)

    def integrand(y):
        shifted = r.evaluate(y + x) - r.evaluate(y - x)
        return first_central_difference(kernel, h, y) * shifted

    cut = cfg.periods * period
    cusps = {k * period + sign * x for k in range(cfg.periods + 1) for sign in (-1, 1)}
    cusps = sorted(c for c in cusps if 0 < c < cut and abs(c - h) > 1e-12)
    sings = [kernel_singularity(spec, h)] + [_profile_singularity(r.family, c) for c in cusps]
    result = integrate_panel(integrand, 0.0, cut, sings, quad_cfg,
                             breakpoints=[0.5 * k * period for k in range(1, 2 * cfg.periods)])

    values = r.evaluate(np.array([x + h, x - h]))
    check = SymmetrisedCheck(
        x=float(x),
        h=float(h),
        lhs=float(r.left_side(values[0]) - r.left_side(values[1])),
        rhs=-result.value,
    )
    logger.debug(f"对称差分 x={x:.4g}, h={h:.4g}: 相对差 {check.relative:.3e}")
    return check


def default_sample_points(period: float, count: int) -> np.ndarray:
    """(0, P/2) 内的等距采样点"""
    return 0.5 * period * np.arange(1, count + 1) / (count + 1)


def verify_profile(
    r: RescaledProfile,
    xs: Optional[Sequence[float]] = None,
    spec: Optional[KernelSpec] = None,
    cfg: Optional[VerifierConfig] = None,
    quad: Optional[QuadratureConfig] = None,
    n_jobs: int = 1,
    progress: bool = False,
) -> List[ResidualReport]:
    """在若干采样点上并行计算压缩方程残差"""
    cfg = cfg or VerifierConfig()
    xs = default_sample_points(r.period, cfg.sample_points) if xs is None else np.asarray(xs, dtype=float)
    if len(xs) == 0:
        raise InvalidInput("至少需要一个采样点")
    logger.info(f"校验 {r.family.value} 波形的压缩方程残差，共 {len(xs)} 个采样点")
    task = partial(_residual_at, r, spec, cfg, quad)
    reports = parallel_map(task, [float(x) for x in xs], n_jobs=n_jobs, desc="残差校验", progress=progress)
    failed = [rep for rep in reports if not rep.passed]
    if failed:
        worst = max(failed, key=lambda rep: rep.relative)
        logger.warning(f"{len(failed)} 个采样点超出阈值，最大相对残差 {worst.relative:.3e} (x = {worst.x:.6g})")
    else:
        logger.info(f"全部采样点通过，最大相对残差 {max(rep.relative for rep in reports):.3e}")
    return reports


def _residual_at(r: RescaledProfile, spec: Optional[KernelSpec], cfg: VerifierConfig,
                 quad: Optional[QuadratureConfig], x: float) -> ResidualReport:
    return condensed_residual(r, x, spec, cfg, quad)
