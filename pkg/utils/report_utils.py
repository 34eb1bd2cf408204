"""
核对结果表格工具 - IdentityReport 与 pandas 表格之间的转换和汇总
"""
import json
import logging
import math
from pathlib import Path
from typing import Iterable, List, Sequence

import pandas as pd

from core.errors import InvalidInput
from core.special_functions import IdentityReport

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["name", "computed", "expected", "lower", "upper", "tolerance", "deviation", "passed", "note"]


def reports_frame(reports: Iterable[IdentityReport]) -> pd.DataFrame:
    """每条核对一行；区间型期望值写入 lower/upper 列"""
    rows = []
    for report in reports:
        interval = isinstance(report.expected, tuple)
        rows.append({
            "name": report.name,
            "computed": report.computed,
            "expected": math.nan if interval else report.expected,
            "lower": report.expected[0] if interval else math.nan,
            "upper": report.expected[1] if interval else math.nan,
            "tolerance": report.tolerance,
            "deviation": report.deviation,
            "passed": report.passed,
            "note": report.note,
        })
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def frame_reports(frame: pd.DataFrame) -> List[IdentityReport]:
    """reports_frame 的逆变换；passed 列按数值重新判定"""
    missing = {"name", "computed", "tolerance"} - set(frame.columns)
    if missing:
        raise InvalidInput(f"表格缺少列: {sorted(missing)}")
    reports = []
    for row in frame.to_dict(orient="records"):
        lower, upper = row.get("lower", math.nan), row.get("upper", math.nan)
        if pd.notna(lower) or pd.notna(upper):
            expected = (lower if pd.notna(lower) else -math.inf, upper if pd.notna(upper) else math.inf)
        else:
            expected = row["expected"]
        note = row.get("note", "")
        reports.append(IdentityReport(
            name=str(row["name"]),
            computed=row["computed"],
            expected=expected,
            tolerance=row["tolerance"],
            note="" if pd.isna(note) else str(note),
        ))
    return reports


def load_reports(path: Path) -> List[IdentityReport]:
    """读取 identities/asymptotics/verify 写出的 CSV 或 JSON 结果"""
    path = Path(path)
    if not path.is_file():
        raise InvalidInput(f"结果文件不存在: {path}")
    if path.suffix.lower() == ".json":
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
        if isinstance(payload, dict):
            payload = payload.get("reports", [])
        return [IdentityReport.from_dict(item) for item in payload]
    return frame_reports(pd.read_csv(path))


def consolidate(paths: Sequence[Path]) -> pd.DataFrame:
    """合并多个结果文件；未通过的行排在最前，其余保持输入顺序"""
    if not paths:
        raise InvalidInput("report 至少需要一个输入文件")
    reports: List[IdentityReport] = []
    for path in paths:
        loaded = load_reports(path)
        logger.info(f"读取 {path}: {len(loaded)} 条核对")
        reports.extend(loaded)
    frame = reports_frame(reports)
    order = sorted(range(len(frame)), key=lambda i: (bool(frame["passed"].iloc[i]), i))
    return frame.iloc[order].reset_index(drop=True)


def summary_line(frame: pd.DataFrame) -> str:
    """单行汇总：PASS 或 FAIL 以及首个失败项"""
    total = len(frame)
    failed = frame[~frame["passed"].astype(bool)]
    if failed.empty:
        return f"PASS: {total}/{total} checks passed"
    return f"FAIL: {len(failed)}/{total} checks failed (first: {failed['name'].iloc[0]})"


def reports_json(reports: Iterable[IdentityReport]) -> List[dict]:
    return [report.to_dict() for report in reports]
