"""
蒙特卡洛试验引擎单元测试
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.detection.detector import conditional_error_prob, conditional_stats, expected_chernoff_bound
from src.linalg.sampling import RngStream, derive_seed, random_psd
from src.models.problem import ProblemInstance
from src.models.results import TrialReport, binomial_std_err
from src.montecarlo.engine import (
    TrialPlan,
    reduce_reports,
    run_blocks,
    run_conditional,
    run_unconditional,
)
from src.utils.errors import ArgumentError


def random_instance(rng: RngStream, n: int, m: int) -> ProblemInstance:
    return ProblemInstance(
        random_psd(n, 0.1, 2.0, rng),
        random_psd(n, 0.1, 2.0, rng),
        rng.standard_normal((m, n)),
    )


def test_conditional_worked_example():
    """测试条件试验: Σx=diag(2,1), Σe=I, T=[1,0], z0=2, z1=-2 时误码率 Q(2)"""
    inst = ProblemInstance(np.diag([2.0, 1.0]), np.eye(2), [[1.0, 0.0]])
    stats = conditional_stats(inst)

    trials = 100000
    report = run_conditional(stats, [2.0], [-2.0], trials=trials, seed=12345)
    p = 0.022750131948179195

    assert report.trials == trials
    assert report.closed_form == pytest.approx(p, rel=1e-10)
    assert abs(report.p_hat - p) <= 4.0 * binomial_std_err(p, trials)

    print("✓ test_conditional_worked_example passed")


def test_conditional_degenerate():
    """测试 z0 = z1 时不做模拟"""
    inst = ProblemInstance(np.diag([2.0, 1.0]), np.eye(2), [[1.0, 0.0]])
    stats = conditional_stats(inst)

    report = run_conditional(stats, [1.5], [1.5], trials=1000, seed=1)
    assert report.trials == 0
    assert report.errors == 0
    assert report.p_hat == 0.5
    assert report.std_err == 0.0
    assert report.closed_form == 0.5

    print("✓ test_conditional_degenerate passed")


def test_results_independent_of_workers():
    """测试结果与 worker 数量无关"""
    rng = RngStream(3)
    inst = random_instance(rng, 6, 2)

    serial = run_unconditional(TrialPlan(inst, trials=5000, seed=77, block_size=700))
    parallel = run_unconditional(TrialPlan(inst, trials=5000, seed=77, block_size=700, workers=4))
    assert serial.errors == parallel.errors
    assert serial.trials == parallel.trials == 5000

    stats = conditional_stats(inst)
    z0, z1 = rng.standard_normal(2), rng.standard_normal(2)
    a = run_conditional(stats, z0, z1, trials=3000, seed=5, block_size=400)
    b = run_conditional(stats, z0, z1, trials=3000, seed=5, block_size=400, workers=3)
    assert a.errors == b.errors

    print("✓ test_results_independent_of_workers passed")


def test_split_blocks_reduce_to_whole():
    """测试分块执行后合并等于整体执行"""
    rng = RngStream(4)
    inst = random_instance(rng, 5, 2)
    plan = TrialPlan(inst, trials=2500, seed=8, block_size=600)

    assert plan.num_blocks == 5
    assert plan.block_trials(4) == 100

    whole = run_unconditional(plan)
    left = run_blocks(plan, [0, 1])
    right = run_blocks(plan, [2, 3, 4])
    merged = reduce_reports([right, left])
    assert merged.errors == whole.errors
    assert merged.trials == whole.trials
    assert merged.p_hat == whole.p_hat

    print("✓ test_split_blocks_reduce_to_whole passed")


def test_reduce_reports_rejects_mixed_instances():
    """测试合并不同实例的结果时报错"""
    a = TrialReport.from_counts(3, 100, 'a')
    b = TrialReport.from_counts(5, 100, 'b')
    with pytest.raises(ArgumentError):
        reduce_reports([a, b])
    with pytest.raises(ArgumentError):
        reduce_reports([])

    merged = reduce_reports([a, TrialReport.from_counts(5, 300, 'a')])
    assert merged.errors == 8
    assert merged.p_hat == pytest.approx(0.02)

    print("✓ test_reduce_reports_rejects_mixed_instances passed")


def test_trial_plan_validation():
    """测试试验计划的前置条件"""
    inst = ProblemInstance(np.diag([2.0, 1.0]), np.eye(2), [[1.0, 0.0]])
    with pytest.raises(ArgumentError):
        TrialPlan(inst, trials=99, seed=1)
    with pytest.raises(ArgumentError):
        TrialPlan(inst, trials=1000, seed=1, workers=0)
    with pytest.raises(ArgumentError):
        TrialPlan(inst, trials=1000, seed=-1)

    print("✓ test_trial_plan_validation passed")


def test_confidence_interval():
    """测试置信区间"""
    report = TrialReport.from_counts(50, 1000, 'k')
    low, high = report.confidence_interval()
    assert low < 0.05 < high
    assert report.std_err == pytest.approx(np.sqrt(0.05 * 0.95 / 1000))

    zero = TrialReport.from_counts(0, 1000, 'k')
    assert zero.confidence_interval() == (0.0, 0.0)

    print("✓ test_confidence_interval passed")


def test_low_snr_limit():
    """测试噪声极强时误码率趋于 1/2"""
    rng = RngStream(1301)
    inst = random_instance(rng, 5, 2)
    noisy = ProblemInstance(inst.sigma_x, 1e8 * inst.sigma_e, inst.T)

    trials = 20000
    report = run_unconditional(TrialPlan(noisy, trials=trials, seed=13))
    assert abs(report.p_hat - 0.5) <= 3.0 * binomial_std_err(0.5, trials)

    print("✓ test_low_snr_limit passed")


def test_high_snr_limit():
    """测试噪声极弱且 m = n - 1 时误码率趋于 0"""
    rng = RngStream(1401)
    n = 5
    sigma_x = random_psd(n, 0.1, 2.0, rng)
    inst = ProblemInstance(sigma_x, 1e-6 * np.eye(n), rng.standard_normal((n - 1, n)))

    report = run_unconditional(TrialPlan(inst, trials=20000, seed=14))
    assert report.p_hat <= 1e-3

    print("✓ test_high_snr_limit passed")


def test_std_err_scaling():
    """测试试验次数加倍时标准误缩小约 √2 倍"""
    rng = RngStream(1501)
    inst = random_instance(rng, 6, 1)

    small = run_unconditional(TrialPlan(inst, trials=40000, seed=15))
    large = run_unconditional(TrialPlan(inst, trials=80000, seed=16))
    assert 0.01 < small.p_hat < 0.99
    assert small.std_err == pytest.approx(binomial_std_err(small.p_hat, 40000))
    assert small.std_err / large.std_err == pytest.approx(np.sqrt(2.0), rel=0.05)

    print("✓ test_std_err_scaling passed")


def _check_conditional_law(count: int, trials: int, seed: int, sigmas: float, required: int) -> None:
    rng = RngStream(seed)
    within = 0
    for k in range(count):
        n = int(rng.generator.integers(2, 9))
        m = int(rng.generator.integers(1, n))
        inst = random_instance(rng, n, m)
        stats = conditional_stats(inst)

        lower_x = np.linalg.cholesky(inst.sigma_x)
        z0 = inst.T @ (lower_x @ rng.standard_normal(n))
        z1 = inst.T @ (lower_x @ rng.standard_normal(n))

        p = conditional_error_prob(stats, z0, z1)
        report = run_conditional(stats, z0, z1, trials=trials, seed=derive_seed(seed, k))
        if abs(report.p_hat - p) <= sigmas * binomial_std_err(p, trials) + 1e-12:
            within += 1

    assert within >= required


def test_conditional_law():
    """测试经验条件误码率与闭式值一致"""
    _check_conditional_law(count=10, trials=20000, seed=606, sigmas=4.0, required=10)

    print("✓ test_conditional_law passed")


@pytest.mark.slow
def test_conditional_law_acceptance():
    """100 组 (实例, z0, z1)，每组 10⁵ 次，至少 99 组在 3 倍标准差内"""
    _check_conditional_law(count=100, trials=100000, seed=707, sigmas=3.0, required=99)


def _check_chernoff_dominance(count: int, trials: int, seed: int) -> None:
    rng = RngStream(seed)
    for k in range(count):
        n = int(rng.generator.integers(3, 10))
        m = int(rng.generator.integers(1, n))
        inst = random_instance(rng, n, m)

        report = run_unconditional(TrialPlan(inst, trials=trials, seed=derive_seed(seed, k)))
        bound = expected_chernoff_bound(inst).expected_chernoff
        assert report.bound.expected_chernoff == pytest.approx(bound)
        assert report.p_hat - 3.0 * report.std_err <= bound


def test_chernoff_dominance():
    """测试经验误码率不超过期望 Chernoff 界"""
    _check_chernoff_dominance(count=5, trials=20000, seed=808)

    print("✓ test_chernoff_dominance passed")


@pytest.mark.slow
def test_chernoff_dominance_acceptance():
    """30 个随机实例，每个 10⁵ 次无条件试验"""
    _check_chernoff_dominance(count=30, trials=100000, seed=909)


if __name__ == '__main__':
    print("Running tests...")
    print("=" * 50)

    test_conditional_worked_example()
    test_conditional_degenerate()
    test_results_independent_of_workers()
    test_split_blocks_reduce_to_whole()
    test_reduce_reports_rejects_mixed_instances()
    test_trial_plan_validation()
    test_confidence_interval()
    test_low_snr_limit()
    test_high_snr_limit()
    test_std_err_scaling()
    test_conditional_law()
    test_chernoff_dominance()

    print("=" * 50)
    print("All tests passed! ✓")
