#!/usr/bin/env python3
"""
Whitham 型方程最高尖峰波的数值实验 - 命令行入口

子命令：identities、kernel、solve、asymptotics、verify、report。
退出码：0 全部核对通过，1 有核对失败或运行异常，2 用法或配置错误，130 中断。
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from config import LOG_LEVELS, OUTPUT_FORMATS, WAVE_FAMILIES, load_run_config, set_config
from core.errors import InvalidConfig, InvalidInput
from launcher import cleanup_services, create_services

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130


def build_parser() -> argparse.ArgumentParser:
    """命令行参数定义"""
    parser = argparse.ArgumentParser(prog="wavecrest", description="Whitham 型方程最高尖峰波的数值实验")
    parser.add_argument("--config", type=Path, help="key=value 形式的配置文件")
    parser.add_argument("--output-dir", type=Path, help="输出与日志目录")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, help="表格输出格式")
    parser.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper, help="控制台日志级别")
    parser.add_argument("--n-jobs", type=int, help="并行进程数")
    parser.add_argument("--progress", action="store_true", default=None, help="显示进度条")
    sub = parser.add_subparsers(dest="command", required=True)

    identities = sub.add_parser("identities", help="积分恒等式、常数与不等式组核对")
    identities.add_argument("--json", action="store_true", help="以 JSON 写出结果")
    identities.add_argument("--kernels", action="store_true", help="同时运行核核对")
    identities.add_argument("--scan-resolution", type=int, default=400, help="不等式扫描网格大小")
    identities.add_argument("--out", type=Path)

    kernel = sub.add_parser("kernel", help="核的数值表")
    kernel.add_argument("--family", choices=WAVE_FAMILIES, required=True)
    kernel.add_argument("--x-min", type=float, default=0.1)
    kernel.add_argument("--x-max", type=float, default=5.0)
    kernel.add_argument("--points", type=int, default=50)
    kernel.add_argument("--out", type=Path)

    solve = sub.add_parser("solve", help="延拓到最高波附近")
    solve.add_argument("--family", choices=WAVE_FAMILIES)
    solve.add_argument("--modes", type=int)
    solve.add_argument("--coarse-modes", type=int)
    solve.add_argument("--stop-gap", type=float)
    solve.add_argument("--period", type=float)
    solve.add_argument("--out", type=Path)
    solve.add_argument("--history", type=Path)

    asymptotics = sub.add_parser("asymptotics", help="波峰渐近拟合")
    asymptotics.add_argument("--in", dest="profile", type=Path, required=True)
    asymptotics.add_argument("--report", type=Path)
    asymptotics.add_argument("--max-gap", type=float)

    verify = sub.add_parser("verify", help="压缩方程残差校验")
    verify.add_argument("--in", dest="profile", type=Path, required=True)
    verify.add_argument("--points", type=int)
    verify.add_argument("--threshold", type=float)
    verify.add_argument("--max-gap", type=float)
    verify.add_argument("--out", type=Path)

    report = sub.add_parser("report", help="合并结果文件")
    report.add_argument("inputs", nargs="+", type=Path)
    report.add_argument("--out", type=Path)
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """命令行参数到配置键的映射；未给出的参数为 None，由 load_run_config 忽略"""
    overrides = {
        "output_dir": args.output_dir,
        "format": args.format,
        "log_level": args.log_level,
        "n_jobs": args.n_jobs,
        "progress": args.progress,
    }
    if args.command == "solve":
        overrides.update({
            "solver.family": args.family,
            "solver.modes": args.modes,
            "solver.coarse_modes": args.coarse_modes,
            "solver.stop_gap": args.stop_gap,
            "solver.period": args.period,
        })
        if args.modes is not None and args.coarse_modes is None:
            base = load_run_config(args.config).solver.coarse_modes
            overrides["solver.coarse_modes"] = min(base, args.modes)
    elif args.command == "verify":
        overrides.update({
            "verifier.sample_points": args.points,
            "verifier.threshold": args.threshold,
        })
    return overrides


def dispatch(orchestrator, args: argparse.Namespace) -> bool:
    """调用子命令对应的编排器方法"""
    if args.command == "identities":
        return orchestrator.run_identities(args.out, args.json, args.kernels, args.scan_resolution)
    if args.command == "kernel":
        if not 0 < args.x_min < args.x_max or args.points < 2:
            raise InvalidInput("kernel 需要 0 < x_min < x_max 且 points >= 2")
        return orchestrator.run_kernel(args.family, args.x_min, args.x_max, args.points, args.out)
    if args.command == "solve":
        return orchestrator.run_solve(args.out, args.history)
    if args.command == "asymptotics":
        return orchestrator.run_asymptotics(args.profile, args.report, args.max_gap)
    if args.command == "verify":
        return orchestrator.run_verify(args.profile, args.out, args.max_gap)
    return orchestrator.run_report(args.inputs, args.out)


def main(argv: Optional[List[str]] = None) -> int:
    """主函数 - 解析参数、初始化服务并运行子命令"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    services = None
    try:
        config = set_config(load_run_config(args.config, collect_overrides(args)))
        services = create_services(config)
        logger.info("=" * 60)
        logger.info(f"子命令 {args.command} 开始")
        logger.info("=" * 60)
        ok = dispatch(services["orchestrator"], args)
        logger.info(f"子命令 {args.command} 结束: {'全部通过' if ok else '存在失败项'}")
        return EXIT_OK if ok else EXIT_FAILED
    except (InvalidConfig, InvalidInput) as e:
        logger.error(f"参数错误: {e}")
        print(f"error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        logger.info("收到中断信号，正在退出...")
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.critical(f"运行失败: {e}", exc_info=True)
        return EXIT_FAILED
    finally:
        if services is not None:
            cleanup_services(services)


if __name__ == "__main__":
    sys.exit(main())
