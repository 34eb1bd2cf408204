"""
奇异积分求积引擎

在有限区间上做全局自适应 Gauss-Legendre 积分：
- 端点代数奇异 |τ-a|^{s-1} 用 τ = a + w·u^{1/s} 消去
- 端点对数奇异用 τ = a + w·e^{-v} 消去
- 区间内部的奇点一律切分，只从两侧逼近
- 半无穷区间 = 有限段 [a, T] + 幂律尾部解析余项

被积函数需接受 numpy 数组并返回同形数组。
"""
import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from config import QuadratureConfig
from core.errors import InvalidDecay, InvalidRange, NonConvergent

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]

ALGEBRAIC = "algebraic"
LOGARITHMIC = "logarithmic"

# 变换后离奇点的最小距离：奇点坐标的若干 ulp 与子区间宽度的 eps 倍中取大者
_ULP_FLOOR = 8 * np.finfo(float).eps
_WIDTH_FLOOR = np.finfo(float).eps
# 舍入误差下限：子区间绝对值之和乘以该系数
_ROUNDOFF = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class Singularity:
    """积分端点或内部的奇点"""
    location: float
    kind: str = ALGEBRAIC
    s: float = 0.5

    def __post_init__(self):
        if self.kind not in (ALGEBRAIC, LOGARITHMIC):
            raise ValueError(f"未知的奇点类型: {self.kind}")
        if self.kind == ALGEBRAIC and not 0 < self.s < 1:
            raise ValueError(f"代数奇点要求 0 < s < 1，当前 s={self.s}")

    @classmethod
    def algebraic(cls, location: float, s: float) -> "Singularity":
        """|τ-location|^{s-1} 型奇点"""
        return cls(float(location), ALGEBRAIC, float(s))

    @classmethod
    def logarithmic(cls, location: float) -> "Singularity":
        """log|τ-location| 型奇点"""
        return cls(float(location), LOGARITHMIC, 0.5)


@dataclass(frozen=True)
class QuadResult:
    """积分值与误差估计"""
    value: float
    error: float
    panels: int = 0

    def __iter__(self):
        yield self.value
        yield self.error

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(
            self.value + other.value,
            self.error + other.error,
            self.panels + other.panels,
        )

    def scaled(self, factor: float) -> "QuadResult":
        return QuadResult(self.value * factor, self.error * abs(factor), self.panels)


@lru_cache(maxsize=8)
def _gauss_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


class _MappedPiece:
    """
    一个子区间及其消奇异变换后的被积函数

    代数奇点：τ = c ± w·u^{1/s}，模型被积函数 |τ-c|^{s-1} 变换后为常数 w^s/s。
    - u < u* = (floor/w)^s 时变换后的被积函数取 u* 处的值（误差 O(floor^{1+s})）
    - τ 只能取到浮点数，f 在实际取到的点求值，再按 (d/|τ-c|)^{s-1} 折回名义距离 d，
      消去 c 附近舍入带来的一阶噪声
    对数奇点：τ = c ± w·e^{-u}，截去 |τ-c| < floor 的部分（约 floor·|log floor|）。
    """

    def __init__(self, f: Integrand, lo: float, hi: float, singular_end: Optional[str], sing: Optional[Singularity]):
        self.f = f
        self.lo = lo
        self.hi = hi
        self.width = hi - lo
        self.singular_end = singular_end
        self.sing = sing
        if sing is not None:
            floor = max(_ULP_FLOOR * abs(sing.location), _WIDTH_FLOOR * self.width)
            self.floor = min(floor, 0.5 * self.width)
            self.anchor = lo if singular_end == "lo" else hi

        if sing is None:
            self.u0, self.u1 = lo, hi
        elif sing.kind == ALGEBRAIC:
            self.u0, self.u1 = 0.0, 1.0
            self.u_star = (self.floor / self.width) ** sing.s
        else:
            self.u0, self.u1 = 0.0, math.log(self.width / self.floor)

    def _point(self, dist: np.ndarray) -> np.ndarray:
        return self.lo + dist if self.singular_end == "lo" else self.hi - dist

    def __call__(self, u: np.ndarray) -> np.ndarray:
        if self.sing is None:
            vals = np.asarray(self.f(u), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise NonConvergent(f"被积函数在 [{self.lo}, {self.hi}] 上出现非有限值")
            return vals

        if self.sing.kind == ALGEBRAIC:
            s = self.sing.s
            u = np.maximum(u, self.u_star)
            dist = self.width * u ** (1.0 / s)
            jac = self.width / s * u ** (1.0 / s - 1.0)
            tau = self._point(dist)
            # 与 anchor 同号且相差不到两倍时减法精确
            actual = np.abs(tau - self.anchor)
            jac = jac * (dist / actual) ** (s - 1.0)
        else:
            dist = self.width * np.exp(-u)
            jac = dist
            tau = self._point(dist)

        vals = np.asarray(self.f(tau), dtype=float) * jac
        if not np.all(np.isfinite(vals)):
            raise NonConvergent(f"奇点 {self.sing.location} 附近的被积函数出现非有限值")
        return vals


def _split_pieces(
    f: Integrand,
    a: float,
    b: float,
    sings: Sequence[Singularity],
    breakpoints: Iterable[float],
) -> List[_MappedPiece]:
    """按奇点与断点切分 [a,b]，每段至多一个奇异端点"""
    by_location = {}
    for sing in sings:
        if not a <= sing.location <= b:
            raise InvalidRange(f"奇点 {sing.location} 不在积分区间 [{a}, {b}] 内")
        by_location[sing.location] = sing

    cuts = {a, b, *by_location}
    cuts.update(p for p in breakpoints if a < p < b)
    points = sorted(cuts)

    pieces = []
    for lo, hi in zip(points[:-1], points[1:]):
        left, right = by_location.get(lo), by_location.get(hi)
        if left is not None and right is not None:
            mid = 0.5 * (lo + hi)
            pieces.append(_MappedPiece(f, lo, mid, "lo", left))
            pieces.append(_MappedPiece(f, mid, hi, "hi", right))
        elif left is not None:
            pieces.append(_MappedPiece(f, lo, hi, "lo", left))
        elif right is not None:
            pieces.append(_MappedPiece(f, lo, hi, "hi", right))
        else:
            pieces.append(_MappedPiece(f, lo, hi, None, None))
    return pieces


def _gauss(h: _MappedPiece, u0: float, u1: float, order: int) -> float:
    nodes, weights = _gauss_rule(order)
    half = 0.5 * (u1 - u0)
    mid = 0.5 * (u1 + u0)
    return half * math.fsum(weights * h(mid + half * nodes))


def _adaptive(pieces: List[_MappedPiece], cfg: QuadratureConfig) -> QuadResult:
    """
    全局自适应：每次细分误差最大的子区间

    子区间的值取两半 Gauss 和，误差取整段与两半之差（嵌套规则差）。
    """
    order = cfg.gauss_order
    counter = itertools.count()
    heap = []
    frozen = []

    def _make(piece_id: int, u0: float, u1: float, depth: int, coarse: float):
        h = pieces[piece_id]
        mid = 0.5 * (u0 + u1)
        left = _gauss(h, u0, mid, order)
        right = _gauss(h, mid, u1, order)
        fine = left + right
        return (-abs(fine - coarse), next(counter), piece_id, u0, u1, depth, fine, left, right)

    for i, h in enumerate(pieces):
        coarse = _gauss(h, h.u0, h.u1, order)
        heapq.heappush(heap, _make(i, h.u0, h.u1, 0, coarse))

    running_total = math.fsum(item[6] for item in heap)
    running_error = math.fsum(-item[0] for item in heap)
    running_abs = math.fsum(abs(item[6]) for item in heap)
    while True:
        tolerance = max(cfg.abs_tol, cfg.rel_tol * abs(running_total), _ROUNDOFF * running_abs)
        if running_error <= tolerance or not heap:
            items = heap + frozen
            total = math.fsum(item[6] for item in items)
            error = math.fsum(-item[0] for item in items)
            magnitude = math.fsum(abs(item[6]) for item in items)
            tolerance = max(cfg.abs_tol, cfg.rel_tol * abs(total), _ROUNDOFF * magnitude)
            if error <= tolerance:
                return QuadResult(total, error, len(items))
            if not heap:
                raise NonConvergent(
                    f"自适应求积在最大深度 {cfg.max_depth} 内未收敛: 误差 {error:.3e} > 容差 {tolerance:.3e}"
                )
            running_total, running_error, running_abs = total, error, magnitude

        if len(heap) + len(frozen) >= cfg.max_panels:
            raise NonConvergent(
                f"自适应求积用尽 {cfg.max_panels} 个子区间仍未收敛: "
                f"误差 {running_error:.3e} > 容差 {tolerance:.3e}"
            )
        item = heapq.heappop(heap)
        _, _, piece_id, u0, u1, depth, fine, left, right = item
        if depth >= cfg.max_depth:
            frozen.append(item)
            continue
        mid = 0.5 * (u0 + u1)
        first = _make(piece_id, u0, mid, depth + 1, left)
        second = _make(piece_id, mid, u1, depth + 1, right)
        heapq.heappush(heap, first)
        heapq.heappush(heap, second)
        running_total += first[6] + second[6] - fine
        running_error += item[0] - first[0] - second[0]
        running_abs += abs(first[6]) + abs(second[6]) - abs(fine)


def integrate_panel(
    f: Integrand,
    a: float,
    b: float,
    sings: Sequence[Singularity] = (),
    cfg: Optional[QuadratureConfig] = None,
    breakpoints: Iterable[float] = (),
) -> QuadResult:
    """
    计算 ∫_a^b f(τ)dτ

    Args:
        f: 向量化的被积函数
        a, b: 积分上下限，要求 a < b
        sings: 位于 [a,b] 内的奇点；内部奇点处会切分区间
        cfg: 求积配置
        breakpoints: 额外的（非奇异）切分点，例如导数间断处

    Returns:
        QuadResult: 积分值、误差估计与子区间数

    Raises:
        InvalidRange: a >= b 或奇点落在区间外
        NonConvergent: 达到最大细分深度或用尽子区间预算后误差仍超出容差
    """
    cfg = cfg or QuadratureConfig()
    a, b = float(a), float(b)
    if not a < b:
        raise InvalidRange(f"积分区间无效: [{a}, {b}]")

    pieces = _split_pieces(f, a, b, sings, breakpoints)
    result = _adaptive(pieces, cfg)
    logger.debug(f"∫[{a:.6g}, {b:.6g}] = {result.value:.15g} ± {result.error:.2e} ({result.panels} 段)")
    return result


def integrate_tail(
    f: Integrand,
    a: float,
    decay_order: Optional[float] = None,
    cfg: Optional[QuadratureConfig] = None,
    sings: Sequence[Singularity] = (),
    breakpoints: Iterable[float] = (),
) -> QuadResult:
    """
    计算 ∫_a^∞ f(τ)dτ，其中 |f(τ)| ~ Cτ^{-p}

    有限段 [a, T] 按几何断点自适应积分；T 之后按 f(T)·T/(p-1) 解析补足，
    C 在 T 与 2T 处的估计之差计入误差。

    Args:
        f: 向量化的被积函数
        a: 下限，要求 a > 0
        decay_order: 衰减阶数 p，缺省取 cfg.tail_order
        cfg: 求积配置
        sings: [a, T] 内的奇点
        breakpoints: 额外切分点

    Raises:
        InvalidDecay: p <= 1
        InvalidRange: a <= 0
    """
    cfg = cfg or QuadratureConfig()
    p = cfg.tail_order if decay_order is None else float(decay_order)
    if not p > 1:
        raise InvalidDecay(f"尾部衰减阶数必须大于1: {p}")
    a = float(a)
    if not a > 0:
        raise InvalidRange(f"半无穷积分要求下限为正: {a}")

    cut = max(cfg.tail_cut, 2.0 * a)
    geometric = []
    point = 2.0 * a
    while point < cut:
        geometric.append(point)
        point *= 2.0

    finite = integrate_panel(f, a, cut, sings, cfg, breakpoints=[*breakpoints, *geometric])

    samples = np.asarray(f(np.array([cut, 2.0 * cut])), dtype=float)
    c_near = samples[0] * cut ** p
    c_far = samples[1] * (2.0 * cut) ** p
    remainder = c_near * cut ** (1.0 - p) / (p - 1.0)
    remainder_error = abs(c_near - c_far) * cut ** (1.0 - p) / (p - 1.0)
    logger.debug(f"尾部 [{cut:.3g}, ∞): 余项 {remainder:.3e}，误差 {remainder_error:.2e}")
    return QuadResult(finite.value + remainder, finite.error + remainder_error, finite.panels)
