"""
路径管理器 - 管理输出目录和原子写入
"""
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Optional, Union
import logging

import pandas as pd

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def atomic_write_text(path: PathLike, text: str) -> Path:
    """
    先写入同目录下的临时文件，再用 os.replace 覆盖目标

    中途失败时目标文件保持原样，临时文件被删除。
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug(f"写入文件: {path}")
    return path


def atomic_write_json(path: PathLike, payload: Any) -> Path:
    """JSON 输出：键排序、两格缩进，保证逐字节可复现"""
    return atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n")


def atomic_write_csv(path: PathLike, frame: pd.DataFrame) -> Path:
    """CSV 输出：无索引列，浮点数保留 17 位有效数字"""
    return atomic_write_text(path, frame.to_csv(index=False, float_format="%.17g", lineterminator="\n"))


class PathManager:
    """一次运行的输出目录"""

    def __init__(self, output_dir: PathLike):
        self.output_dir = Path(output_dir)

    def ensure(self) -> Path:
        """创建输出目录"""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir

    @property
    def log_dir(self) -> Path:
        """日志目录"""
        return self.output_dir / "logs"

    def resolve(self, path: Optional[PathLike], default_name: str) -> Path:
        """
        解析输出路径

        未给出时使用输出目录下的 default_name；相对路径按当前工作目录解释。
        """
        if path is None:
            return self.ensure() / default_name
        return Path(path)

    def write_json(self, path: Optional[PathLike], payload: Any, default_name: str) -> Path:
        target = atomic_write_json(self.resolve(path, default_name), payload)
        logger.info(f"已写入 {target}")
        return target

    def write_csv(self, path: Optional[PathLike], frame: pd.DataFrame, default_name: str) -> Path:
        target = atomic_write_csv(self.resolve(path, default_name), frame)
        logger.info(f"已写入 {target}（{len(frame)} 行）")
        return target

    def write_table(self, path: Optional[PathLike], frame: pd.DataFrame, default_name: str,
                    fmt: str = "csv") -> Path:
        """按输出格式写表格；json 格式写成记录列表"""
        if fmt == "json":
            stem = Path(default_name).with_suffix(".json").name
            records = json.loads(frame.to_json(orient="records", double_precision=15))
            return self.write_json(path, records, stem)
        return self.write_csv(path, frame, default_name)
