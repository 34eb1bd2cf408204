"""
极限外推工具 - 小参数多项式拟合与 Richardson 加速
"""
import logging
from typing import Callable, List, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


def make_terms(n_terms: int) -> List[Callable[[np.ndarray], np.ndarray]]:
    """小参数 ε 的幂次基函数 1, ε, ε², ..."""
    return [lambda e, i=i: np.asarray(e, dtype=float) ** i for i in range(n_terms)]


def limit_coeffs(eps_vals: Sequence[float], f_vals: Sequence[float], n_terms: int = 3) -> Tuple[np.ndarray, float]:
    """
    按 f(ε) ≈ Σ c_i ε^i 做最小二乘拟合

    Args:
        eps_vals: 小参数取值
        f_vals: 对应的函数值
        n_terms: 基函数个数（含常数项）

    Returns:
        (系数数组, 拟合残差的最大绝对值)
    """
    eps = np.asarray(eps_vals, dtype=float)
    values = np.asarray(f_vals, dtype=float)
    if eps.shape != values.shape or eps.ndim != 1:
        raise ValueError("eps_vals 与 f_vals 必须是等长的一维数组")
    if len(eps) < n_terms:
        raise ValueError(f"样本数 {len(eps)} 少于基函数个数 {n_terms}")

    terms = make_terms(n_terms)
    mat = np.column_stack([t(eps) for t in terms])
    coeffs, *_ = np.linalg.lstsq(mat, values, rcond=None)
    misfit = float(np.max(np.abs(mat @ coeffs - values))) if len(values) else 0.0
    return coeffs, misfit


def limit(eps_vals: Sequence[float], f_vals: Sequence[float], n_terms: int = 3) -> Tuple[float, float]:
    """ε → 0 的外推极限与拟合残差"""
    coeffs, misfit = limit_coeffs(eps_vals, f_vals, n_terms)
    return float(coeffs[0]), misfit


def richardson_limit(step_ratio: float, values: Sequence[float]) -> float:
    """
    Richardson 外推：values 按步长由粗到细排列，误差展开为 h, h², ...

    Args:
        step_ratio: 相邻两级步长之比（>1）
        values: 各级近似值

    Returns:
        外推后的估计
    """
    n_steps = len(values)
    if n_steps == 0:
        raise ValueError("values 不能为空")
    if n_steps == 1:
        return values[0]

    last_level = list(values)
    for m in range(1, n_steps):
        mult = step_ratio ** m
        factor = 1.0 / (mult - 1.0)
        last_level = [
            factor * (mult * last_level[i + 1] - last_level[i])
            for i in range(n_steps - m)
        ]
    return last_level[0]
