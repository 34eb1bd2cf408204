"""
数值实验配置管理 - 使用数据类分离配置验证逻辑

配置来源只有两个：key=value 形式的纯文本配置文件（用 python-dotenv 解析，
但不写入环境变量）和命令行参数，后者覆盖前者。
"""
import logging
import logging.config
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from dotenv import dotenv_values

from core.errors import InvalidConfig

current_dir = Path(__file__).parent
storage_dir = current_dir / "storage"

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
WAVE_FAMILIES = ["whitham", "bidirectional"]
OUTPUT_FORMATS = ["csv", "json"]


@dataclass(frozen=True)
class QuadratureConfig:
    """奇异积分求积配置"""
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_depth: int = 40
    max_panels: int = 200_000
    tail_cut: float = 1e4
    tail_order: float = 2.0
    gauss_order: int = 15

    def __post_init__(self):
        """验证求积配置"""
        if not self.rel_tol > 0:
            raise InvalidConfig(f"rel_tol 必须大于0: {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise InvalidConfig(f"abs_tol 不能为负数: {self.abs_tol}")
        if self.max_depth < 1:
            raise InvalidConfig(f"max_depth 至少为1: {self.max_depth}")
        if self.max_panels < 1:
            raise InvalidConfig(f"max_panels 至少为1: {self.max_panels}")
        if not self.tail_cut > 1:
            raise InvalidConfig(f"tail_cut 必须大于1: {self.tail_cut}")
        if not self.tail_order > 1:
            raise InvalidConfig(f"tail_order 必须大于1: {self.tail_order}")
        if self.gauss_order < 3:
            raise InvalidConfig(f"gauss_order 至少为3: {self.gauss_order}")

    def with_tolerance(self, rel_tol: float) -> "QuadratureConfig":
        """返回只修改相对容差的副本"""
        return replace(self, rel_tol=rel_tol)


@dataclass(frozen=True)
class SolverConfig:
    """伪谱 Newton 延拓求解器配置"""
    family: str = "whitham"
    period: float = 2 * math.pi
    modes: int = 512
    coarse_modes: int = 128
    newton_tol: float = 1e-10
    newton_max_iter: int = 30
    step_initial: float = 0.02
    step_min: float = 1e-8
    step_max: float = 0.05
    stop_gap: float = 1e-3
    gap_fraction: float = 0.5
    onset_amplitude: float = 1e-3
    refine_gap: float = 0.02
    max_steps: int = 2000

    def __post_init__(self):
        """验证求解器配置"""
        if self.family not in WAVE_FAMILIES:
            raise InvalidConfig(f"不支持的波族: {self.family}，可选 {WAVE_FAMILIES}")
        if not self.period > 0:
            raise InvalidConfig(f"period 必须大于0: {self.period}")
        if self.modes < 16:
            raise InvalidConfig(f"modes 至少为16: {self.modes}")
        if not 16 <= self.coarse_modes <= self.modes:
            raise InvalidConfig(f"coarse_modes 必须在 [16, modes] 内: {self.coarse_modes}")
        if not (self.newton_tol > 0 and self.stop_gap > 0 and self.onset_amplitude > 0):
            raise InvalidConfig("newton_tol、stop_gap、onset_amplitude 必须大于0")
        if self.newton_max_iter < 1 or self.max_steps < 1:
            raise InvalidConfig("newton_max_iter 与 max_steps 至少为1")
        if not 0 < self.step_min <= self.step_initial <= self.step_max:
            raise InvalidConfig(
                f"步长需满足 0 < step_min <= step_initial <= step_max: "
                f"{self.step_min}, {self.step_initial}, {self.step_max}"
            )
        if not 0 < self.gap_fraction < 1:
            raise InvalidConfig(f"gap_fraction 必须在 (0,1) 内: {self.gap_fraction}")
        if not self.refine_gap > 0:
            raise InvalidConfig(f"refine_gap 必须大于0: {self.refine_gap}")


@dataclass(frozen=True)
class AsymptoticsConfig:
    """波峰渐近拟合配置"""
    nu_fraction: float = 0.125
    min_cells: int = 4
    derivative_min_cells: int = 8
    min_samples: int = 16
    pair_budget: int = 1_000_000
    holder_samples: int = 160

    def __post_init__(self):
        """验证拟合配置"""
        if not 0 < self.nu_fraction <= 0.5:
            raise InvalidConfig(f"nu_fraction 必须在 (0, 1/2] 内: {self.nu_fraction}")
        if self.min_cells < 1 or self.derivative_min_cells < self.min_cells:
            raise InvalidConfig("需满足 1 <= min_cells <= derivative_min_cells")
        if self.min_samples < 3:
            raise InvalidConfig(f"min_samples 至少为3: {self.min_samples}")
        if self.pair_budget < 1000 or self.holder_samples < 8:
            raise InvalidConfig("pair_budget 与 holder_samples 过小")


@dataclass(frozen=True)
class VerifierConfig:
    """压缩方程残差校验配置"""
    threshold: float = 1e-4
    sample_points: int = 8
    periods: int = 3
    rel_tol: float = 1e-8
    abs_tol: float = 1e-13

    def __post_init__(self):
        """验证残差校验配置"""
        if not self.threshold > 0:
            raise InvalidConfig(f"threshold 必须大于0: {self.threshold}")
        if self.sample_points < 1 or self.periods < 1:
            raise InvalidConfig("sample_points 与 periods 至少为1")
        if not (self.rel_tol > 0 and self.abs_tol >= 0):
            raise InvalidConfig("残差求积容差必须为正")

    def quadrature(self, base: QuadratureConfig) -> QuadratureConfig:
        """残差积分使用的求积配置"""
        return replace(base, rel_tol=self.rel_tol, abs_tol=self.abs_tol)


@dataclass
class RunConfig:
    """一次命令行运行的总配置"""
    output_dir: Path = field(default_factory=lambda: storage_dir / "runs")
    format: str = "csv"
    log_level: str = "INFO"
    n_jobs: int = 1
    progress: bool = False
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    asymptotics: AsymptoticsConfig = field(default_factory=AsymptoticsConfig)
    verifier: VerifierConfig = field(default_factory=VerifierConfig)

    def __post_init__(self):
        """初始化后验证"""
        self.output_dir = Path(self.output_dir)
        self.log_level = str(self.log_level).upper()
        if self.log_level not in LOG_LEVELS:
            logger.warning(f"无效的日志级别 {self.log_level}，使用默认值 INFO")
            self.log_level = "INFO"
        if self.format not in OUTPUT_FORMATS:
            raise InvalidConfig(f"不支持的输出格式: {self.format}，可选 {OUTPUT_FORMATS}")
        if self.n_jobs == 0:
            raise InvalidConfig("n_jobs 不能为0")

    def to_dict(self) -> Dict[str, Any]:
        """展开为大写键的扁平字典（用于日志记录）"""
        flat = {
            "OUTPUT_DIR": str(self.output_dir),
            "FORMAT": self.format,
            "LOG_LEVEL": self.log_level,
            "N_JOBS": self.n_jobs,
            "PROGRESS": self.progress,
        }
        for section in _SECTIONS:
            sub = getattr(self, section)
            for item in fields(sub):
                flat[f"{section}_{item.name}".upper()] = getattr(sub, item.name)
        return flat


_SECTIONS = {
    "quadrature": QuadratureConfig,
    "solver": SolverConfig,
    "asymptotics": AsymptoticsConfig,
    "verifier": VerifierConfig,
}
_TOP_LEVEL_DEFAULTS = {
    "output_dir": Path(),
    "format": "csv",
    "log_level": "INFO",
    "n_jobs": 1,
    "progress": False,
}
_TOP_LEVEL = set(_TOP_LEVEL_DEFAULTS)


def _coerce(raw: Any, default: Any) -> Any:
    """按默认值的类型转换配置文本"""
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if isinstance(default, bool):
        lowered = text.lower()
        if lowered not in ("true", "false", "1", "0", "yes", "no"):
            raise InvalidConfig(f"无法解析布尔值: {raw}")
        return lowered in ("true", "1", "yes")
    if isinstance(default, int):
        value = float(text)
        if not value.is_integer():
            raise InvalidConfig(f"需要整数: {raw}")
        return int(value)
    if isinstance(default, float):
        return float(text)
    if isinstance(default, Path):
        return Path(text)
    return text


def load_run_config(
    config_file: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    解析配置文件与命令行覆盖项，构建 RunConfig

    Args:
        config_file: key=value 配置文件路径；键可写作 `solver.modes` 或顶层键 `log_level`
        overrides: 命令行给出的键值（值为 None 的项被忽略）

    Returns:
        RunConfig: 完整解析后的配置

    Raises:
        InvalidConfig: 未知键、无法解析的值或违反约束
    """
    merged: Dict[str, Any] = {}
    if config_file is not None:
        path = Path(config_file)
        if not path.is_file():
            raise InvalidConfig(f"配置文件不存在: {path}")
        merged.update({k.lower(): v for k, v in dotenv_values(path).items() if v is not None})
    if overrides:
        merged.update({k.lower(): v for k, v in overrides.items() if v is not None})

    top: Dict[str, Any] = {}
    sections: Dict[str, Dict[str, Any]] = {name: {} for name in _SECTIONS}

    for key, raw in merged.items():
        section, _, name = key.rpartition(".")
        if not section and name in _TOP_LEVEL:
            known, target = _TOP_LEVEL_DEFAULTS, top
        elif section in _SECTIONS:
            known = {f.name: f.default for f in fields(_SECTIONS[section])}
            target = sections[section]
        else:
            raise InvalidConfig(f"未知配置项: {key}")
        if name not in known:
            raise InvalidConfig(f"未知配置项: {key}")
        try:
            target[name] = _coerce(raw, known[name])
        except ValueError as e:
            raise InvalidConfig(f"配置项 {key} 的值无法解析: {raw}") from e

    built = {name: cls(**sections[name]) for name, cls in _SECTIONS.items()}
    return RunConfig(**top, **built)


def build_logging_config(log_dir: Path, log_level: str = "INFO") -> Dict[str, Any]:
    """生成 dictConfig 所需的日志配置"""
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "standard": {
                "format": "%(levelname)s | %(asctime)s | %(name)s | L%(lineno)d | %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S",
            },
        },
        "handlers": {
            "console": {
                "class": "logging.StreamHandler",
                "level": log_level,
                "formatter": "standard",
                "stream": "ext://sys.stderr",
            },
            "file": {
                "class": "logging.handlers.RotatingFileHandler",
                "level": "DEBUG",
                "formatter": "standard",
                "filename": str(log_dir / "run.log"),
                "maxBytes": 10 * 1024 * 1024,
                "backupCount": 5,
                "encoding": "utf-8",
            },
        },
        "root": {
            "level": "DEBUG",
            "handlers": ["console", "file"],
        },
    }


def init_logging(log_level: str = "INFO", log_dir: Optional[Path] = None):
    """初始化全局日志配置"""
    log_dir = Path(log_dir) if log_dir is not None else storage_dir / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)
    logging.config.dictConfig(build_logging_config(log_dir, log_level))


# 全局配置实例
_config_instance: Optional[RunConfig] = None


def get_config() -> RunConfig:
    """获取全局配置实例"""
    global _config_instance
    if _config_instance is None:
        _config_instance = RunConfig()
    return _config_instance


def set_config(config: RunConfig) -> RunConfig:
    """安装本次运行解析得到的配置"""
    global _config_instance
    _config_instance = config
    return config
