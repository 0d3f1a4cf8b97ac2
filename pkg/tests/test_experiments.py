"""
实验调度、报告输出与命令行单元测试
"""

import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest
import yaml

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.config.config_manager import ConfigManager
from src.config.experiment import ExperimentConfig
from src.detection.detector import gaussian_bound
from src.experiments.runner import ExperimentRunner, best_random_ratio, snr_db_of, snr_scale
from src.main import main
from src.report.generator import ReportGenerator
from src.utils.errors import ConfigError, RankDeficiencyError


def make_config(**experiment) -> ExperimentConfig:
    """由实验参数构造配置（日志只输出到控制台）"""
    data = {
        'experiment': experiment,
        'output': {'path': None},
        'logging': {'file': ''},
    }
    return ExperimentConfig.from_config(ConfigManager(config_path=None, data=data))


def write_yaml(directory: str, data: dict, name: str = 'config.yaml') -> str:
    path = os.path.join(directory, name)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(data, f, allow_unicode=True)
    return path


def assert_non_increasing(values, rtol=1e-12):
    for a, b in zip(values, values[1:]):
        assert b <= a * (1.0 + rtol)


def test_snr_scale():
    """测试按迹比缩放噪声协方差"""
    sigma_x = np.diag([2.0, 1.0, 1.0])
    sigma_e = np.eye(3)
    for db in (-10.0, 0.0, 3.0, 10.0):
        assert snr_db_of(sigma_x, snr_scale(sigma_x, sigma_e, db)) == pytest.approx(db, abs=1e-12)

    print("✓ test_snr_scale passed")


def test_random_vs_opt():
    """测试随机变换对比：最优变换位于中间且倒数界最大"""
    cfg = make_config(kind='random-vs-opt', n=6, m=2, snr_db=0.0, random_transforms=20, seed=11)
    rows = ExperimentRunner(cfg).run_random_vs_opt()

    assert len(rows) == 21
    assert [r.index for r in rows] == list(range(21))
    assert rows[10].label == 'optimal'
    assert sum(1 for r in rows if r.label == 'optimal') == 1

    best = max(rows, key=lambda r: r.reciprocal_bound)
    assert best.label == 'optimal'
    assert rows[10].ratio_to_optimal == 1.0

    random_ratios = [r.ratio_to_optimal for r in rows if r.label == 'random']
    assert all(ratio >= 1.0 for ratio in random_ratios)
    assert best_random_ratio(rows) == pytest.approx(min(random_ratios), rel=1e-12)
    for row in rows:
        assert row.ratio_to_optimal == pytest.approx(row.bound / rows[10].bound, rel=1e-12)

    print("✓ test_random_vs_opt passed")


def test_sweep_snr_monotone():
    """测试最优界随 SNR 单调不增"""
    cfg = make_config(
        kind='sweep-snr', n=10, m=3,
        snr_db={'start': -10, 'stop': 10, 'step': 5},
        random_transforms=5, seed=3,
    )
    rows = ExperimentRunner(cfg).run_sweep()

    assert [r.x for r in rows] == [-10, -5, 0, 5, 10]
    assert_non_increasing([r.bound_opt for r in rows])
    for row in rows:
        assert row.bound_best_random >= row.bound_opt
        assert row.p_hat is None

    print("✓ test_sweep_snr_monotone passed")


def test_sweep_m_monotone():
    """测试最优界随 m 单调不增，且 m = n-1 时接近 m = n 的界"""
    n = 12
    cfg = make_config(kind='sweep-m', n=n, m={'start': 1, 'stop': n - 1}, snr_db=0.0, seed=5)
    runner = ExperimentRunner(cfg)
    rows = runner.run_sweep()

    assert [r.x for r in rows] == list(range(1, n))
    assert_non_increasing([r.bound_opt for r in rows])

    sigma_x, base_e = runner.draw_covariances(n)
    full = gaussian_bound(sigma_x, snr_scale(sigma_x, base_e, 0.0))
    assert rows[-1].bound_opt >= full.expected_chernoff * (1.0 - 1e-9)

    print("✓ test_sweep_m_monotone passed")


@pytest.mark.slow
def test_sweep_m_endpoint_acceptance():
    """n=50, SNR=1 时 m = n-1 的界与 m = n 的界相差不超过 10%"""
    n = 50
    cfg = make_config(kind='sweep-m', n=n, m={'start': 1, 'stop': n - 1}, snr_db=0.0, seed=2024)
    runner = ExperimentRunner(cfg)
    rows = runner.run_sweep()
    assert_non_increasing([r.bound_opt for r in rows])

    sigma_x, base_e = runner.draw_covariances(n)
    full = gaussian_bound(sigma_x, snr_scale(sigma_x, base_e, 0.0)).expected_chernoff
    assert abs(rows[-1].bound_opt - full) <= 0.1 * full


def test_sweep_n_monotone():
    """测试固定 m 时最优界随 n 单调不增，且每个点的 SNR 都等于目标值"""
    cfg = make_config(kind='sweep-n', n=[4, 16, 64], m=2, snr_db=0.0, seed=9)
    runner = ExperimentRunner(cfg)
    rows = runner.run_sweep()

    assert [r.x for r in rows] == [4, 16, 64]
    assert_non_increasing([r.bound_opt for r in rows])

    values, point = runner.sweep_points()
    for k, n in enumerate(values):
        sigma_x, sigma_e, m = point(k)
        assert sigma_x.shape == sigma_e.shape == (n, n)
        assert m == 2
        assert snr_db_of(sigma_x, sigma_e) == pytest.approx(0.0, abs=1e-9)

    cfg = make_config(kind='sweep-n', n=[4, 8, 16, 32], m=2, snr_db=3.0, seed=9)
    values, point = ExperimentRunner(cfg).sweep_points()
    for k in range(len(values)):
        sigma_x, sigma_e, _ = point(k)
        assert snr_db_of(sigma_x, sigma_e) == pytest.approx(3.0, abs=1e-9)

    print("✓ test_sweep_n_monotone passed")


def test_sweep_with_trials():
    """测试扫描点上的蒙特卡洛估计"""
    cfg = make_config(kind='sweep-snr', n=6, m=2, snr_db=[0.0, 10.0], trials=2000, seed=4)
    rows = ExperimentRunner(cfg).run_sweep()

    for row in rows:
        assert 0.0 <= row.p_hat <= 1.0
        assert row.std_err >= 0.0
        assert row.p_hat - 4.0 * row.std_err <= row.bound_opt

    print("✓ test_sweep_with_trials passed")


def test_infeasible_sweep_rejected():
    """测试 m ≥ n 的扫描点在计算前报错"""
    with pytest.raises(ConfigError):
        make_config(kind='sweep-m', n=5, m={'start': 1, 'stop': 5}, snr_db=0.0)
    with pytest.raises(ConfigError):
        make_config(kind='sweep-snr', n=5, m=2, trials=50)
    with pytest.raises(ConfigError):
        make_config(kind='random-vs-opt', n=5, m=2, random_transforms=0)

    print("✓ test_infeasible_sweep_rejected passed")


def test_inspect_worked_example():
    """测试单实例检查：最优变换差距为 0，次优变换差距为正"""
    data = {
        'experiment': {'kind': 'inspect'},
        'inspect': {
            'sigma_x': [[2.0, 0.0], [0.0, 1.0]],
            'sigma_e': [[1.0, 0.0], [0.0, 1.0]],
            'transform': [[float(1.0 / np.sqrt(2.0)), 0.0]],
        },
        'output': {'path': None},
    }
    cfg = ExperimentConfig.from_config(ConfigManager(config_path=None, data=data))
    report = ExperimentRunner(cfg).inspect()

    assert (report.n, report.m) == (2, 1)
    assert report.j_value == pytest.approx(2.0, abs=1e-12)
    assert report.expected_chernoff == pytest.approx(0.5 * 2.0 ** -0.5, abs=1e-9)
    assert report.optimal_product == pytest.approx(4.0, abs=1e-12)
    assert report.optimal_j == pytest.approx(2.0, abs=1e-12)
    assert report.gap == 0.0
    assert report.cond_cov_spectrum == pytest.approx([1.0, 2.0])

    data['inspect']['transform'] = [[0.6, 0.8]]
    cfg = ExperimentConfig.from_config(ConfigManager(config_path=None, data=data))
    assert ExperimentRunner(cfg).inspect().gap > 0.0

    data['inspect']['transform'] = [[0.0, 0.0]]
    cfg = ExperimentConfig.from_config(ConfigManager(config_path=None, data=data))
    with pytest.raises(RankDeficiencyError):
        ExperimentRunner(cfg).inspect()

    text = ReportGenerator().render_inspect(report)
    assert 'gap = 0\n' in text
    assert 'optimal_product = 4\n' in text
    assert text.endswith('gap = 0\n')

    print("✓ test_inspect_worked_example passed")


def test_csv_schema():
    """测试 CSV 表头和数值格式"""
    cfg = make_config(kind='sweep-snr', n=6, m=2, snr_db=[0.0, 5.0], seed=1)
    rows = ExperimentRunner(cfg).run_sweep()
    text = ReportGenerator().render_csv('sweep-snr', rows)

    lines = text.split('\n')
    assert lines[0] == 'snr_db,j_opt,bound_opt,bound_best_random,p_hat,std_err'
    assert lines[1].startswith('0.0,') or lines[1].startswith('0,')
    # 未评估的列为空
    assert lines[1].endswith(',,,')
    assert text.endswith('\n')
    assert '\r' not in text

    print("✓ test_csv_schema passed")


def test_cli_deterministic_output():
    """测试相同配置和种子的命令行输出逐字节相同，且与线程数无关"""
    with tempfile.TemporaryDirectory() as tmp:
        config_path = write_yaml(tmp, {
            'experiment': {
                'kind': 'sweep-snr', 'n': 8, 'm': 3,
                'snr_db': {'start': -5, 'stop': 5, 'step': 5},
                'random_transforms': 3, 'trials': 500, 'seed': 77,
            },
            'montecarlo': {'block_size': 128},
            'logging': {'file': ''},
        })

        outputs = []
        for name, workers in (('a.csv', '1'), ('b.csv', '1'), ('c.csv', '3')):
            out = os.path.join(tmp, name)
            code = main(['sweep', '--config', config_path, '--out', out, '--workers', workers])
            assert code == 0
            with open(out, 'rb') as f:
                outputs.append(f.read())

        assert outputs[0] == outputs[1] == outputs[2]

        rvo_config = write_yaml(tmp, {
            'experiment': {'kind': 'random-vs-opt', 'n': 8, 'm': 3, 'snr_db': 0.0},
            'logging': {'file': ''},
        }, name='rvo.yaml')
        out = os.path.join(tmp, 'rvo.csv')
        assert main(['random-vs-opt', '--config', rvo_config, '--out', out,
                     '--random-transforms', '6', '--seed', '5']) == 0
        with open(out, 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()
        assert lines[0] == 'index,label,j_value,bound,reciprocal_bound,ratio_to_optimal'
        assert len(lines) == 8
        assert lines[4].split(',')[1] == 'optimal'

    print("✓ test_cli_deterministic_output passed")


def test_cli_with_shipped_config():
    """测试 README 中的 random-vs-opt 命令可直接使用项目自带的配置"""
    with open(project_root / 'config' / 'config.yaml', 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f)
    data['logging']['file'] = ''

    with tempfile.TemporaryDirectory() as tmp:
        config_path = write_yaml(tmp, data)
        out = os.path.join(tmp, 'rvo.csv')
        assert main(['random-vs-opt', '--config', config_path,
                     '--random-transforms', '5', '--out', out]) == 0
        with open(out, 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()
        assert len(lines) == 7
        assert lines[3].split(',')[1] == 'optimal'
        assert float(lines[3].split(',')[-1]) == 1.0

        out = os.path.join(tmp, 'rvo_3db.csv')
        assert main(['random-vs-opt', '--config', config_path, '--random-transforms', '2',
                     '--snr-db', '3', '--out', out]) == 0

        # sweep-snr 的扫描范围只来自 snr_sweep
        out = os.path.join(tmp, 'sweep.csv')
        assert main(['sweep', '--config', config_path, '--kind', 'sweep-snr',
                     '--snr-db', '3', '--out', out]) == 2
        assert not os.path.exists(out)

    print("✓ test_cli_with_shipped_config passed")


def test_cli_exit_codes():
    """测试命令行退出码"""
    with tempfile.TemporaryDirectory() as tmp:
        config_path = write_yaml(tmp, {
            'experiment': {'kind': 'sweep-m', 'n': 4, 'm': {'start': 1, 'stop': 4}},
            'logging': {'file': ''},
        })
        # 不可行的扫描点属于配置错误
        assert main(['sweep', '--config', config_path, '--out', os.path.join(tmp, 'x.csv')]) == 2
        assert not os.path.exists(os.path.join(tmp, 'x.csv'))

        assert main(['sweep', '--config', os.path.join(tmp, 'missing.yaml')]) == 2

        sigma_x = os.path.join(tmp, 'sx.txt')
        sigma_e = os.path.join(tmp, 'se.txt')
        rank_def = os.path.join(tmp, 't_bad.txt')
        good_t = os.path.join(tmp, 't.txt')
        broken = os.path.join(tmp, 'broken.txt')
        for path, text in (
            (sigma_x, "2 0 0\n0 1 0\n0 0 1\n"),
            (sigma_e, "1 0 0\n0 1 0\n0 0 1\n"),
            (rank_def, "1 0 0\n2 0 0\n"),
            (good_t, "1 0 0\n"),
            (broken, "1 0 0\n0 1 oops\n0 0 1\n"),
        ):
            with open(path, 'w', encoding='utf-8') as f:
                f.write(text)

        args = ['inspect', '--config', config_path, '--sigma-x', sigma_x, '--sigma-e', sigma_e]
        assert main(args + ['--transform', rank_def]) == 2

        report_path = os.path.join(tmp, 'inspect.txt')
        assert main(args + ['--transform', good_t, '--out', report_path]) == 0
        with open(report_path, 'r', encoding='utf-8') as f:
            report = f.read()
        assert 'gap = 0\n' in report
        assert 'n = 3\n' in report

        broken_args = ['inspect', '--config', config_path, '--sigma-x', broken,
                       '--sigma-e', sigma_e, '--transform', good_t]
        assert main(broken_args) == 2

    print("✓ test_cli_exit_codes passed")


if __name__ == '__main__':
    print("Running tests...")
    print("=" * 50)

    test_snr_scale()
    test_random_vs_opt()
    test_sweep_snr_monotone()
    test_sweep_m_monotone()
    test_sweep_n_monotone()
    test_sweep_with_trials()
    test_infeasible_sweep_rejected()
    test_inspect_worked_example()
    test_csv_schema()
    test_cli_deterministic_output()
    test_cli_with_shipped_config()
    test_cli_exit_codes()

    print("=" * 50)
    print("All tests passed! ✓")
