"""
周期行波求解器

偶的 P 周期稳态波 φ(x) = Σ a_k cos(2πkx/P)：
- 卷积按 Fourier 乘子作用，非线性项在 4N 模（8N 点）网格上去混叠后投影回 0..N 模
- 以波峰高度 μ = φ(0) 为延拓参数，波速 c 作为未知量，Newton 迭代求解加边系统
- 从小振幅分岔点出发，由粗到细逐级加密模数，直到与最大高度的间隙小于 stop_gap
"""
import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg
from tqdm import tqdm

from config import SolverConfig
from core.errors import BranchStalled, InvalidInput, NoConvergence, SingularJacobian
from core.kernels import KernelSpec, periodized_fourier_coefficients

logger = logging.getLogger(__name__)

INV_SQRT3 = 1.0 / math.sqrt(3.0)
# 去混叠网格相对于原模数的倍数
DEALIAS_FACTOR = 4


class WaveFamily(str, Enum):
    """波方程族"""
    WHITHAM = "whitham"
    BIDIRECTIONAL = "bidirectional"

    @property
    def kernel(self) -> KernelSpec:
        return KernelSpec.whitham() if self == WaveFamily.WHITHAM else KernelSpec.bidirectional()

    def height_max(self, c: float) -> float:
        """最高波的波峰高度：c/2 或 (1-1/√3)c"""
        return 0.5 * c if self == WaveFamily.WHITHAM else (1.0 - INV_SQRT3) * c


# ---------------------------------------------------------------------------
# 谱变换
# ---------------------------------------------------------------------------

def modes_to_grid(modes: np.ndarray) -> np.ndarray:
    """余弦系数 a_0..a_N 在 2N 点均匀网格上的取值"""
    a = np.asarray(modes, dtype=float)
    n = len(a) - 1
    spectrum = n * a.astype(complex)
    spectrum[0] *= 2.0
    spectrum[n] *= 2.0
    return np.fft.irfft(spectrum, 2 * n)


def grid_to_modes(values: np.ndarray) -> np.ndarray:
    """2N 点网格取值的余弦系数 a_0..a_N"""
    v = np.asarray(values, dtype=float)
    n = len(v) // 2
    spectrum = np.fft.rfft(v).real / n
    spectrum[0] *= 0.5
    spectrum[n] *= 0.5
    return spectrum


def pad_modes(modes: np.ndarray, n_modes: int) -> np.ndarray:
    """零延拓到 n_modes 个模（谱插值）"""
    a = np.asarray(modes, dtype=float)
    if n_modes < len(a) - 1:
        raise InvalidInput(f"不能把 {len(a) - 1} 模截断到 {n_modes} 模")
    out = np.zeros(n_modes + 1)
    out[:len(a)] = a
    return out


def grid_points(period: float, n_modes: int) -> np.ndarray:
    """2N 点网格 x_j = jP/(2N)"""
    return period * np.arange(2 * n_modes) / (2 * n_modes)


# ---------------------------------------------------------------------------
# 波形
# ---------------------------------------------------------------------------

@dataclass
class WaveProfile:
    """偶周期波形；variable 为 "phi"（表面高度）或 "v"（双向方程的速度变量）"""
    family: WaveFamily
    modes: np.ndarray
    speed_c: float
    period: float = 2 * math.pi
    residual_norm: float = math.nan
    variable: str = ""

    def __post_init__(self):
        self.family = WaveFamily(self.family)
        self.modes = np.asarray(self.modes, dtype=float)
        if self.modes.ndim != 1 or len(self.modes) < 3:
            raise InvalidInput("modes 必须是长度至少为3的一维数组")
        if not self.variable:
            self.variable = "phi" if self.family == WaveFamily.WHITHAM else "v"

    @property
    def n_modes(self) -> int:
        return len(self.modes) - 1

    @property
    def grid_values(self) -> np.ndarray:
        return modes_to_grid(self.modes)

    @property
    def grid(self) -> np.ndarray:
        return grid_points(self.period, self.n_modes)

    @property
    def crest_height(self) -> float:
        return float(math.fsum(self.modes))

    @property
    def height_max(self) -> float:
        if self.variable == "phi" and self.family == WaveFamily.BIDIRECTIONAL:
            return self.speed_c ** 2 / 3.0
        return self.family.height_max(self.speed_c)

    @property
    def gap(self) -> float:
        """最大高度与波峰高度之差"""
        return self.height_max - self.crest_height

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """任意点处的余弦级数值"""
        x = np.asarray(x, dtype=float)
        k = np.arange(self.n_modes + 1)
        wavenumber = 2.0 * math.pi / self.period
        out = np.zeros(x.shape)
        for start in range(0, len(k), 512):
            kk = k[start:start + 512]
            out += np.cos(wavenumber * np.multiply.outer(x, kk)) @ self.modes[start:start + 512]
        return out

    def to_dict(self) -> Dict:
        return {
            "family": self.family.value,
            "variable": self.variable,
            "period": self.period,
            "speed_c": self.speed_c,
            "residual_norm": None if math.isnan(self.residual_norm) else self.residual_norm,
            "modes": self.modes.tolist(),
            "grid": self.grid_values.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Dict) -> "WaveProfile":
        try:
            residual = data.get("residual_norm")
            return cls(
                family=data["family"],
                modes=np.asarray(data["modes"], dtype=float),
                speed_c=float(data["speed_c"]),
                period=float(data["period"]),
                residual_norm=math.nan if residual is None else float(residual),
                variable=data.get("variable", ""),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInput(f"无法解析波形数据: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "WaveProfile":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidInput(f"波形 JSON 格式错误: {e}") from e
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# 稳态方程
# ---------------------------------------------------------------------------

class SteadyWaveSystem:
    """
    N 模 Galerkin 截断下的稳态方程 m_k a_k = [F(φ)]_k

    Whitham: F = φ(c-φ)；双向: F = v(c-v)(c-v/2)。
    """

    def __init__(self, family: WaveFamily, period: float, n_modes: int):
        self.family = WaveFamily(family)
        self.period = float(period)
        self.n_modes = int(n_modes)
        self.multiplier = periodized_fourier_coefficients(self.family.kernel, self.period, self.n_modes)

    def nonlinearity(self, u: np.ndarray, c: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(F, ∂_u F, ∂_c F) 的逐点值"""
        if self.family == WaveFamily.WHITHAM:
            return u * (c - u), c - 2.0 * u, u
        return (
            u * (c - u) * (c - 0.5 * u),
            c * c - 3.0 * c * u + 1.5 * u * u,
            u * (2.0 * c - 1.5 * u),
        )

    def _dealiased(self, modes: np.ndarray, c: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        fine = DEALIAS_FACTOR * self.n_modes
        u = modes_to_grid(pad_modes(modes, fine))
        return tuple(grid_to_modes(values) for values in self.nonlinearity(u, c))

    def residual_coefficients(self, modes: np.ndarray, c: float) -> np.ndarray:
        """r_k = m_k a_k - [F(φ)]_k，k = 0..N"""
        forcing, _, _ = self._dealiased(modes, c)
        return self.multiplier * modes - forcing[:self.n_modes + 1]

    def residual_grid(self, modes: np.ndarray, c: float) -> np.ndarray:
        return modes_to_grid(self.residual_coefficients(modes, c))

    def bordered_jacobian(self, modes: np.ndarray, c: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        加边系统的 Jacobian 与右端

        未知量 (a_0..a_N, c)；最后一个方程为波峰钉扎 Σa_k = μ（右端在 newton_solve 中补齐）。
        ∂[F'(φ)cos(jx)]_k/∂a_j = ĝ_{|k-j|} + ĝ_{k+j}，ĝ_0 = g_0，ĝ_l = g_l/2，第 0 行再乘 1/2。
        """
        n = self.n_modes
        forcing, slope, speed = self._dealiased(modes, c)
        g_hat = slope[:2 * n + 1].copy()
        g_hat[1:] *= 0.5

        size = n + 2
        jac = np.zeros((size, size))
        block = jac[:n + 1, :n + 1]
        mirrored = np.concatenate((g_hat[n:0:-1], g_hat[:n + 1]))
        toeplitz_view = sliding_window_view(mirrored, n + 1)[::-1]
        hankel_view = sliding_window_view(g_hat, n + 1)
        np.add(toeplitz_view, hankel_view, out=block)
        block[0] *= 0.5
        np.negative(block, out=block)
        block[np.diag_indices(n + 1)] += self.multiplier
        jac[:n + 1, n + 1] = -speed[:n + 1]
        jac[n + 1, :n + 1] = 1.0

        residual = np.empty(size)
        residual[:n + 1] = self.multiplier * modes - forcing[:n + 1]
        return jac, residual


def residual_unidirectional(profile: WaveProfile, c: Optional[float] = None) -> np.ndarray:
    """K_W*φ - φ(c-φ) 在 2N 点网格上的值"""
    c = profile.speed_c if c is None else c
    system = SteadyWaveSystem(WaveFamily.WHITHAM, profile.period, profile.n_modes)
    return system.residual_grid(profile.modes, c)


def residual_bidirectional(profile: WaveProfile, c: Optional[float] = None) -> np.ndarray:
    """K_B*v - v(c-v)(c-v/2) 在 2N 点网格上的值"""
    c = profile.speed_c if c is None else c
    system = SteadyWaveSystem(WaveFamily.BIDIRECTIONAL, profile.period, profile.n_modes)
    return system.residual_grid(profile.modes, c)


def recover_phi(v_profile: WaveProfile, c: Optional[float] = None) -> WaveProfile:
    """由双向方程的 v 恢复表面高度 φ = cv - v²/2（2N 模，精确）"""
    c = v_profile.speed_c if c is None else c
    n = 2 * v_profile.n_modes
    v = modes_to_grid(pad_modes(v_profile.modes, n))
    phi = grid_to_modes(c * v - 0.5 * v * v)
    return WaveProfile(
        family=WaveFamily.BIDIRECTIONAL,
        modes=phi,
        speed_c=c,
        period=v_profile.period,
        residual_norm=v_profile.residual_norm,
        variable="phi",
    )


def spectral_derivative(profile: WaveProfile) -> np.ndarray:
    """导数在 2N 点网格上的值"""
    n = profile.n_modes
    wavenumber = 2.0 * math.pi / profile.period
    spectrum = n * profile.modes.astype(complex)
    spectrum[0] = 0.0
    spectrum[n] = 0.0
    spectrum *= 1j * wavenumber * np.arange(n + 1)
    return np.fft.irfft(spectrum, 2 * n)


def fourier_decay_slope(profile: WaveProfile, decades: float = 1.0) -> float:
    """|a_k| 在最后一个已分辨十倍频程上的对数斜率"""
    n = profile.n_modes
    k = np.arange(1, n + 1)
    magnitude = np.abs(profile.modes[1:])
    resolved = magnitude > 1e-14 * np.max(magnitude)
    top = k[resolved].max()
    window = resolved & (k >= top / 10.0 ** decades) & (k <= top)
    if np.count_nonzero(window) < 4:
        raise InvalidInput("可用于拟合衰减斜率的模数不足")
    slope, _ = np.polyfit(np.log(k[window]), np.log(magnitude[window]), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# Newton 与延拓
# ---------------------------------------------------------------------------

def newton_solve(system: SteadyWaveSystem, initial: WaveProfile, mu: float,
                 cfg: SolverConfig) -> Tuple[WaveProfile, int]:
    """
    在钉扎 φ(0) = μ 下用 Newton 迭代求解，c 为未知量

    Returns:
        (收敛的波形, 迭代次数)

    Raises:
        SingularJacobian: Jacobian 奇异
        NoConvergence: 达到迭代上限、发散，或收敛到超过最大高度的解
    """
    if initial.n_modes != system.n_modes:
        raise InvalidInput(f"初值模数 {initial.n_modes} 与系统模数 {system.n_modes} 不一致")
    modes = initial.modes.copy()
    c = float(initial.speed_c)
    n = system.n_modes
    first_norm = None

    for iteration in range(cfg.newton_max_iter + 1):
        coefficients = system.residual_coefficients(modes, c)
        pin_error = abs(math.fsum(modes) - mu)
        norm = float(np.max(np.abs(modes_to_grid(coefficients))))
        logger.debug(f"Newton 第 {iteration} 次: |r|∞ = {norm:.3e}, 钉扎误差 {pin_error:.1e}, c = {c:.15g}")
        if not math.isfinite(norm):
            raise NoConvergence(f"Newton 迭代出现非有限残差 (μ={mu})")
        if norm <= cfg.newton_tol and pin_error <= cfg.newton_tol:
            profile = WaveProfile(system.family, modes, c, system.period, norm)
            if profile.crest_height > profile.height_max + 1e-12:
                raise NoConvergence(f"μ={mu} 超过最高波高度 {profile.height_max:.12g}")
            return profile, iteration
        first_norm = norm if first_norm is None else first_norm
        if iteration == cfg.newton_max_iter or norm > 1e6 * max(first_norm, cfg.newton_tol):
            break
        jac, residual = system.bordered_jacobian(modes, c)
        residual[n + 1] = math.fsum(modes) - mu
        try:
            delta = linalg.solve(jac, -residual, overwrite_a=True, overwrite_b=True, check_finite=True)
        except linalg.LinAlgError as e:
            raise SingularJacobian(f"Jacobian 奇异 (μ={mu}, N={n})") from e
        except ValueError as e:
            raise NoConvergence(f"Jacobian 含非有限值 (μ={mu})") from e
        modes += delta[:n + 1]
        c += float(delta[n + 1])
    raise NoConvergence(f"Newton 迭代在 {cfg.newton_max_iter} 次内未收敛 (μ={mu}, N={n})")


def bifurcation_speed(family: WaveFamily, period: float) -> float:
    """分岔点波速：Whitham 为 K̂(2π/P)，双向为 √K̂(2π/P)"""
    multiplier = float(periodized_fourier_coefficients(family.kernel, period, 4)[1])
    return multiplier if family == WaveFamily.WHITHAM else math.sqrt(multiplier)


@dataclass
class HistoryRow:
    mu: float
    c: float
    residual: float
    iterations: int
    modes: int


@dataclass
class ContinuationState:
    """延拓状态：当前波峰高度 μ、步长与历史"""
    branch_param: float
    step: float
    history: List[HistoryRow] = field(default_factory=list)


def mode_levels(cfg: SolverConfig) -> List[int]:
    """模数阶梯：coarse_modes 逐次加倍直到 modes"""
    levels = []
    n = cfg.coarse_modes
    while n < cfg.modes:
        levels.append(n)
        n *= 2
    levels.append(cfg.modes)
    return levels


def refine_thresholds(cfg: SolverConfig, n_levels: int) -> List[float]:
    """间隙小于 thresholds[i] 时从第 i 级升到第 i+1 级；在 refine_gap 与 stop_gap 之间几何分布"""
    if n_levels < 2:
        return []
    low = min(cfg.stop_gap, cfg.refine_gap)
    ratio = low / cfg.refine_gap
    return [cfg.refine_gap * ratio ** (i / (n_levels - 1)) for i in range(n_levels - 1)]


class BranchTracer:
    """从分岔点沿波峰高度延拓到最高波"""

    def __init__(self, family: WaveFamily, cfg: SolverConfig, progress: bool = False):
        self.family = WaveFamily(family)
        self.cfg = cfg
        self.progress = progress
        self.levels = mode_levels(cfg)
        self.thresholds = refine_thresholds(cfg, len(self.levels))
        self.level = 0
        self.system = SteadyWaveSystem(self.family, cfg.period, self.levels[0])
        self.state = ContinuationState(branch_param=cfg.onset_amplitude, step=cfg.step_initial)
        self.profiles: List[WaveProfile] = []
        self._previous: Optional[WaveProfile] = None

    @property
    def current(self) -> WaveProfile:
        return self.profiles[-1]

    def _record(self, profile: WaveProfile, iterations: int):
        self.profiles.append(profile)
        self.state.history.append(HistoryRow(
            self.state.branch_param, profile.speed_c, profile.residual_norm, iterations, profile.n_modes,
        ))

    def start(self) -> WaveProfile:
        """在分岔点附近以振幅 onset_amplitude 的余弦作为初值"""
        c0 = bifurcation_speed(self.family, self.cfg.period)
        modes = np.zeros(self.levels[0] + 1)
        modes[1] = self.cfg.onset_amplitude
        guess = WaveProfile(self.family, modes, c0, self.cfg.period)
        profile, iterations = newton_solve(self.system, guess, self.state.branch_param, self.cfg)
        logger.info(f"分岔点 c₀ = {c0:.12g}，起始波 c = {profile.speed_c:.12g}，N = {self.levels[0]}")
        self._record(profile, iterations)
        return profile

    def _refine(self):
        """升到下一级模数并在当前 μ 处重新求解"""
        self.level += 1
        n = self.levels[self.level]
        self.system = SteadyWaveSystem(self.family, self.cfg.period, n)
        lifted = replace(self.current, modes=pad_modes(self.current.modes, n))
        try:
            profile, iterations = newton_solve(self.system, lifted, self.state.branch_param, self.cfg)
        except NoConvergence as e:
            raise BranchStalled(f"加密到 N = {n} 后在 μ = {self.state.branch_param:.12g} 处不收敛") from e
        if self._previous is not None:
            self._previous = replace(self._previous, modes=pad_modes(self._previous.modes, n))
        logger.info(f"模数加密到 N = {n}，间隙 {profile.gap:.3e}")
        self._record(profile, iterations)

    def _predict(self, target: float) -> WaveProfile:
        current = self.current
        previous = self._previous
        if previous is None:
            return current
        span = current.crest_height - previous.crest_height
        if span == 0:
            return current
        weight = (target - current.crest_height) / span
        return replace(
            current,
            modes=current.modes + weight * (current.modes - previous.modes),
            speed_c=current.speed_c + weight * (current.speed_c - previous.speed_c),
        )

    def advance(self) -> bool:
        """尝试一步延拓；成功返回 True，步长被减半返回 False"""
        cfg = self.cfg
        gap = self.current.gap
        step = min(self.state.step, cfg.gap_fraction * gap, cfg.step_max)
        target = self.state.branch_param + step
        try:
            profile, iterations = newton_solve(self.system, self._predict(target), target, cfg)
        except NoConvergence as e:
            self.state.step = 0.5 * step
            logger.debug(f"μ = {target:.12g} 处失败（{e}），步长减半为 {self.state.step:.3e}")
            if self.state.step < cfg.step_min:
                raise BranchStalled(
                    f"步长降到 {self.state.step:.2e} < step_min，间隙仍为 {gap:.3e}"
                ) from e
            return False
        self._previous = self.current
        self.state.branch_param = target
        self._record(profile, iterations)
        grow = 1.5 if iterations <= 4 else 1.0
        self.state.step = min(grow * step, cfg.step_max)
        return True

    def run(self) -> List[WaveProfile]:
        cfg = self.cfg
        if not self.profiles:
            self.start()
        accepted = 0
        with tqdm(total=cfg.max_steps, desc=f"延拓 {self.family.value}", disable=not self.progress) as bar:
            while True:
                gap = self.current.gap
                finest = self.level == len(self.levels) - 1
                if gap < cfg.stop_gap:
                    if finest:
                        break
                    self._refine()
                    continue
                if not finest and gap < self.thresholds[self.level]:
                    self._refine()
                    continue
                if accepted >= cfg.max_steps:
                    raise BranchStalled(f"达到最大步数 {cfg.max_steps}，间隙仍为 {gap:.3e}")
                if self.advance():
                    accepted += 1
                    bar.update(1)
                    bar.set_postfix(gap=f"{self.current.gap:.2e}")
        logger.info(
            f"到达最高波附近: μ = {self.state.branch_param:.12g}, c = {self.current.speed_c:.12g}, "
            f"间隙 {self.current.gap:.3e}, N = {self.current.n_modes}, 共 {accepted} 步"
        )
        return self.profiles

    def history_table(self) -> pd.DataFrame:
        """延拓历史：mu, c, residual, iterations, modes"""
        return pd.DataFrame(
            [(row.mu, row.c, row.residual, row.iterations, row.modes) for row in self.state.history],
            columns=["mu", "c", "residual", "iterations", "modes"],
        )


def continue_to_highest(family: WaveFamily, cfg: SolverConfig, progress: bool = False) -> List[WaveProfile]:
    """从分岔点延拓到最高波附近，返回沿途的全部波形（最后一个为最接近最高波者）"""
    return BranchTracer(family, cfg, progress).run()
