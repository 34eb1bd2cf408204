"""
实验编排器 - 每个命令行子命令对应一个方法

各方法按步骤记录日志，结果经 PathManager 原子写出；
返回值表示本次请求的全部核对是否通过。
"""
import logging
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config import RunConfig, get_config
from core.asymptotics import asymptotic_reports, rescale
from core.errors import BranchStalled, InvalidInput, NotHighest, WindowTooSmall
from core.kernels import kernel_table, run_kernel_suite
from core.residual_verifier import toy_residual, verify_profile
from core.special_functions import IdentityReport, run_identity_suite
from core.wave_solver import BranchTracer, WaveFamily, WaveProfile
from utils.path_manager import PathManager
from utils.report_utils import consolidate, reports_frame, reports_json, summary_line

logger = logging.getLogger(__name__)

TOY_EXPONENTS = (0.3, 0.5, 0.7)
TOY_POINTS = (0.25, 1.0, 4.0)


class ExperimentOrchestrator:
    """按子命令组织数值实验"""

    def __init__(self, services: Optional[Dict] = None):
        self.services = services or {}
        self.config: RunConfig = self.services.get("config") or get_config()
        self.paths: PathManager = self.services.get("path_manager") or PathManager(self.config.output_dir)
        self._started = time.time()
        logger.info("ExperimentOrchestrator 初始化完成")

    # ------------------------------------------------------------------
    # 输出
    # ------------------------------------------------------------------

    def _write_reports(self, reports: List[IdentityReport], out: Optional[Path], stem: str,
                       fmt: Optional[str] = None) -> Path:
        fmt = fmt or self.config.format
        if fmt == "json":
            return self.paths.write_json(out, reports_json(reports), f"{stem}.json")
        return self.paths.write_csv(out, reports_frame(reports), f"{stem}.csv")

    @staticmethod
    def _print_reports(reports: List[IdentityReport]):
        frame = reports_frame(reports)
        print(frame[["name", "computed", "deviation", "passed"]].to_string(index=False))
        print(summary_line(frame))

    @staticmethod
    def _load_profile(path: Path) -> WaveProfile:
        if not Path(path).is_file():
            raise InvalidInput(f"波形文件不存在: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return WaveProfile.from_json(f.read())

    # ------------------------------------------------------------------
    # 子命令
    # ------------------------------------------------------------------

    def run_identities(self, out: Optional[Path] = None, as_json: bool = False,
                       kernels: bool = False, resolution: int = 400) -> bool:
        """恒等式、常数、不等式组与玩具方程核对；kernels=True 时加上核核对"""
        cfg = self.config
        logger.info("步骤1: 积分恒等式、常数与不等式组")
        reports = run_identity_suite(cfg.quadrature, cfg.n_jobs, resolution, progress=cfg.progress)

        logger.info("步骤2: 玩具方程残差")
        for s in TOY_EXPONENTS:
            for x in TOY_POINTS:
                toy = toy_residual(s, x, cfg.quadrature)
                reports.append(IdentityReport(f"toy_residual_s{s:.1f}_x{x:g}", toy.relative, (-np.inf, 1e-7)))

        if kernels:
            logger.info("步骤3: 核核对")
            reports += run_kernel_suite(cfg.quadrature)

        self._write_reports(reports, out, "identities", "json" if as_json else None)
        self._print_reports(reports)
        return all(r.passed for r in reports)

    def run_kernel(self, family: str, x_min: float, x_max: float, points: int,
                   out: Optional[Path] = None) -> bool:
        """核在 [x_min, x_max] 对数网格上的数值表"""
        spec = WaveFamily(family).kernel
        logger.info(f"生成 {family} 核数值表: [{x_min}, {x_max}]，{points} 点")
        xs = np.geomspace(x_min, x_max, points)
        frame = pd.DataFrame(kernel_table(spec, xs, self.config.quadrature))
        self.paths.write_table(out, frame, f"kernel_{family}.csv", self.config.format)
        return True

    def run_solve(self, out: Optional[Path] = None, history: Optional[Path] = None) -> bool:
        """延拓到最高波附近并写出最后一个波形"""
        solver = self.config.solver
        logger.info(
            f"开始延拓 {solver.family}: N = {solver.coarse_modes} → {solver.modes}，"
            f"stop_gap = {solver.stop_gap:g}，P = {solver.period:.12g}"
        )
        tracer = BranchTracer(WaveFamily(solver.family), solver, self.config.progress)
        try:
            profiles = tracer.run()
            ok = True
        except BranchStalled as e:
            logger.error(f"延拓停滞: {e}")
            if not tracer.profiles:
                return False
            profiles = tracer.profiles
            ok = False

        final = profiles[-1]
        self.paths.write_json(out, final.to_dict(), f"profile_{solver.family}.json")
        if history is not None:
            self.paths.write_csv(history, tracer.history_table(), "history.csv")
        print(f"{solver.family}: c = {final.speed_c:.15g}, gap = {final.gap:.3e}, "
              f"N = {final.n_modes}, residual = {final.residual_norm:.2e}")
        return ok and final.gap <= solver.stop_gap

    def run_asymptotics(self, profile_path: Path, out: Optional[Path] = None,
                        max_gap: Optional[float] = None) -> bool:
        """波峰渐近拟合与正则性核对"""
        profile = self._load_profile(profile_path)
        max_gap = self.config.solver.stop_gap if max_gap is None else max_gap
        logger.info(f"波峰渐近分析: {profile.family.value}, N = {profile.n_modes}, 间隙 {profile.gap:.3e}")
        try:
            reports = asymptotic_reports(profile, self.config.asymptotics, max_gap)
        except (NotHighest, WindowTooSmall) as e:
            logger.error(f"无法拟合波峰渐近: {e}")
            return False
        self._write_reports(reports, out, "fits")
        self._print_reports(reports)
        return all(r.passed for r in reports)

    def run_verify(self, profile_path: Path, out: Optional[Path] = None,
                   max_gap: Optional[float] = None) -> bool:
        """压缩方程残差校验"""
        cfg = self.config
        profile = self._load_profile(profile_path)
        max_gap = cfg.solver.stop_gap if max_gap is None else max_gap
        try:
            r = rescale(profile, max_gap)
        except NotHighest as e:
            logger.error(f"无法校验: {e}")
            return False
        residuals = verify_profile(r, cfg=cfg.verifier, quad=cfg.quadrature,
                                   n_jobs=cfg.n_jobs, progress=cfg.progress)
        frame = pd.DataFrame([rep.to_dict() for rep in residuals])
        self.paths.write_table(out, frame, "residuals.csv", cfg.format)
        print(frame[["x", "u", "relative", "passed"]].to_string(index=False))

        reports = [
            IdentityReport(f"condensed_residual_x{rep.x:.6g}", rep.relative, (-np.inf, cfg.verifier.threshold))
            for rep in residuals
        ]
        self._write_reports(reports, None, "verify_checks")
        return all(rep.passed for rep in residuals)

    def run_report(self, inputs: Sequence[Path], out: Optional[Path] = None) -> bool:
        """合并多个结果文件为一张表"""
        frame = consolidate([Path(p) for p in inputs])
        if out is not None:
            self.paths.write_csv(out, frame, "report.csv")
        print(frame[["name", "computed", "tolerance", "passed"]].to_string(index=False))
        line = summary_line(frame)
        print(line)
        return line.startswith("PASS")

    def close(self):
        logger.info(f"本次运行耗时 {time.time() - self._started:.1f} 秒")
