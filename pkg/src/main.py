"""
部分信息检测系统 - 主入口程序

根据配置执行随机变换对比、参数扫描或单实例检查，并输出 CSV / 文本报告
"""

import sys
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.config.config_manager import ConfigManager
from src.config.experiment import ExperimentConfig
from src.config.settings import SWEEP_KINDS
from src.experiments.runner import ExperimentRunner
from src.report.generator import ReportGenerator
from src.utils.errors import ConfigError, PartialDetectError
from src.utils.logger import LOGGER_NAME, setup_logger


def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '-c', '--config',
        default='config/config.yaml',
        help='配置文件路径 (默认: config/config.yaml)'
    )
    common.add_argument('--seed', type=int, help='随机种子，64 位无符号整数 (覆盖配置文件)')
    common.add_argument('--trials', type=int, help='蒙特卡洛试验次数，0 表示不做模拟 (覆盖配置文件)')
    common.add_argument('--out', help='输出文件路径 (覆盖配置文件)')
    common.add_argument('--workers', type=int, help='并行线程数 (覆盖配置文件)')
    common.add_argument('-v', '--verbose', action='store_true', help='显示详细日志')

    parser = argparse.ArgumentParser(
        description='加性有色高斯噪声下的部分信息检测',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  python -m src.main random-vs-opt --random-transforms 1000 --out results/rvo.csv   # 随机变换与最优变换对比
  python -m src.main sweep --kind sweep-m --snr-db 0    # m 扫描
  python -m src.main sweep --kind sweep-snr --seed 7    # SNR 扫描
  python -m src.main inspect --sigma-x sx.txt --sigma-e se.txt --transform t.txt
        """
    )
    sub = parser.add_subparsers(dest='command', required=True)

    rvo = sub.add_parser('random-vs-opt', parents=[common], help='随机变换与最优变换对比')
    rvo.add_argument('--random-transforms', type=int, help='随机变换个数 (覆盖配置文件)')
    rvo.add_argument('--snr-db', type=float, help='SNR (dB) (覆盖配置文件)')

    sweep = sub.add_parser('sweep', parents=[common], help='SNR / m / n 扫描')
    sweep.add_argument('--kind', choices=SWEEP_KINDS, help='扫描类型 (默认取配置文件)')
    sweep.add_argument('--snr-db', type=float, help='sweep-m / sweep-n 的固定 SNR (dB) (覆盖配置文件)')

    inspect = sub.add_parser('inspect', parents=[common], help='单实例检查')
    inspect.add_argument('--sigma-x', help='Σx 矩阵文件')
    inspect.add_argument('--sigma-e', help='Σe 矩阵文件')
    inspect.add_argument('--transform', help='变换矩阵 T 文件')

    return parser


def collect_overrides(args: argparse.Namespace, config: ConfigManager) -> Dict[str, Any]:
    """
    把命令行参数整理成配置覆盖项

    Args:
        args: 解析后的参数
        config: 配置管理器

    Returns:
        {点号键: 值}
    """
    overrides = {
        'experiment.seed': args.seed,
        'experiment.trials': args.trials,
        'montecarlo.workers': args.workers,
    }

    if args.command == 'random-vs-opt':
        overrides['experiment.kind'] = 'random-vs-opt'
        overrides['experiment.random_transforms'] = args.random_transforms
        overrides['experiment.snr_db'] = args.snr_db
        overrides['output.path'] = args.out
    elif args.command == 'sweep':
        kind = args.kind or config.get('experiment.kind')
        if kind not in SWEEP_KINDS:
            raise ConfigError(f"sweep 需要 --kind 或配置 experiment.kind 为 {SWEEP_KINDS} 之一，实际 {kind!r}")
        if kind == 'sweep-snr' and args.snr_db is not None:
            raise ConfigError("sweep-snr 的扫描范围由 experiment.snr_sweep 给出，不接受 --snr-db")
        overrides['experiment.kind'] = kind
        overrides['output.path'] = args.out
        overrides['experiment.snr_db'] = args.snr_db
    else:
        overrides['experiment.kind'] = 'inspect'
        overrides['inspect.sigma_x'] = args.sigma_x
        overrides['inspect.sigma_e'] = args.sigma_e
        overrides['inspect.transform'] = args.transform

    return overrides


def run(args: argparse.Namespace) -> int:
    """按子命令执行实验"""
    config = ConfigManager(args.config)
    config.apply_overrides(collect_overrides(args, config))

    # 设置日志
    log_config = dict(config.get_logging_config())
    if args.verbose:
        log_config['level'] = 'DEBUG'
    logger = setup_logger(LOGGER_NAME, log_config)

    cfg = ExperimentConfig.from_config(config)
    logger.info("=" * 60)
    logger.info(f"部分信息检测: {cfg.kind}, seed={cfg.seed}")
    logger.info("=" * 60)

    runner = ExperimentRunner(cfg)
    report_gen = ReportGenerator(cfg.float_digits)

    if cfg.kind == 'inspect':
        report = runner.inspect()
        sys.stdout.write(report_gen.write_inspect(report, args.out))
        return 0

    if cfg.kind == 'random-vs-opt':
        rows: List[Any] = runner.run_random_vs_opt()
    else:
        rows = runner.run_sweep()

    if not cfg.output_path:
        raise ConfigError("缺少输出路径 output.path")
    report_gen.write_csv(cfg.kind, rows, cfg.output_path)

    logger.info(f"✓ 任务完成: {cfg.output_path}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    args = build_parser().parse_args(argv)

    try:
        return run(args)
    except KeyboardInterrupt:
        print("\n用户中断执行", file=sys.stderr)
        return 130
    except PartialDetectError as e:
        print(f"错误: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        setup_logger(LOGGER_NAME, {'level': 'ERROR', 'file': ''}).error(f"执行失败: {e}", exc_info=True)
        return 1


if __name__ == '__main__':
    sys.exit(main())
