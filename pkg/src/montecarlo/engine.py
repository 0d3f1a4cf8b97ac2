"""
蒙特卡洛试验引擎

试验被预先划分为固定大小的块，第 b 块使用 RngStream(seed, b)，
worker 只负责调度块，因此结果与 worker 数量和完成顺序无关
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..detection.detector import (
    conditional_error_prob,
    conditional_stats,
    expected_chernoff_bound,
    map_decide_batch,
    sample_conditional,
    sample_trials,
)
from ..linalg.sampling import RngStream
from ..models.problem import ConditionalStats, ProblemInstance
from ..models.results import TrialReport
from ..utils.errors import ArgumentError
from ..utils.helpers import calculate_hash
from ..utils.logger import get_logger


logger = get_logger('montecarlo')

MIN_TRIALS = 100
DEFAULT_BLOCK_SIZE = 10000


@dataclass(frozen=True, eq=False)
class TrialPlan:
    """一次无条件试验的计划"""

    instance: ProblemInstance
    trials: int
    seed: int
    workers: int = 1
    block_size: int = DEFAULT_BLOCK_SIZE
    stats: Optional[ConditionalStats] = field(default=None, repr=False)

    def __post_init__(self):
        if self.trials < MIN_TRIALS:
            raise ArgumentError(f"试验次数至少为 {MIN_TRIALS}，实际 {self.trials}")
        if self.workers < 1:
            raise ArgumentError(f"workers 必须为正整数: {self.workers}")
        if self.block_size < 1:
            raise ArgumentError(f"block_size 必须为正整数: {self.block_size}")
        if self.seed < 0:
            raise ArgumentError(f"seed 必须非负: {self.seed}")
        if self.stats is None:
            object.__setattr__(self, 'stats', conditional_stats(self.instance))

    @property
    def num_blocks(self) -> int:
        return -(-self.trials // self.block_size)

    def block_trials(self, block_id: int) -> int:
        """第 block_id 块的试验次数"""
        if not 0 <= block_id < self.num_blocks:
            raise ArgumentError(f"块编号越界: {block_id}")
        start = block_id * self.block_size
        return min(self.block_size, self.trials - start)


def _execute(task: Callable[[int], TrialReport], block_ids: Sequence[int], workers: int) -> List[TrialReport]:
    """按块执行，结果顺序与 block_ids 一致"""
    if workers <= 1 or len(block_ids) <= 1:
        return [task(b) for b in block_ids]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, block_ids))


def reduce_reports(parts: Sequence[TrialReport]) -> TrialReport:
    """
    合并分块结果

    计数求和后重新计算 p̂ 和标准误，满足结合律且与顺序无关。

    Args:
        parts: 同一实例的分块结果

    Returns:
        合并后的 TrialReport
    """
    if not parts:
        raise ArgumentError("没有可合并的结果")

    keys = {part.instance_key for part in parts}
    if len(keys) != 1:
        raise ArgumentError(f"分块结果来自不同实例: {sorted(keys)}")

    first = parts[0]
    errors = sum(part.errors for part in parts)
    trials = sum(part.trials for part in parts)

    return TrialReport.from_counts(
        errors=errors,
        trials=trials,
        instance_key=first.instance_key,
        bound=first.bound,
        closed_form=first.closed_form,
    )


def run_blocks(plan: TrialPlan, block_ids: Sequence[int]) -> TrialReport:
    """
    运行计划中的部分块，用于拆分执行

    Args:
        plan: 试验计划
        block_ids: 要运行的块编号

    Returns:
        这些块合并后的 TrialReport
    """
    inst = plan.instance
    stats = plan.stats
    key = inst.key()
    bound = expected_chernoff_bound(inst, stats)

    def task(block_id: int) -> TrialReport:
        count = plan.block_trials(block_id)
        rng = RngStream(plan.seed, block_id)
        bits, x0, x1, e = sample_trials(inst, rng, count)

        y = np.where(bits[:, None] == 1, x1, x0) + e
        decisions = map_decide_batch(stats, x0 @ inst.T.T, x1 @ inst.T.T, y)
        errors = int(np.count_nonzero(decisions != bits))
        return TrialReport.from_counts(errors, count, key, bound=bound)

    return reduce_reports(_execute(task, list(block_ids), plan.workers))


def run_unconditional(plan: TrialPlan) -> TrialReport:
    """
    无条件误码率估计：每次试验重新抽取 (x0, x1, e, bit)

    Args:
        plan: 试验计划

    Returns:
        TrialReport，bound 字段为期望 Chernoff 界
    """
    logger.info(
        f"无条件试验: n={plan.instance.n}, m={plan.instance.m}, "
        f"试验 {plan.trials} 次, {plan.num_blocks} 块, workers={plan.workers}"
    )
    report = run_blocks(plan, range(plan.num_blocks))
    logger.info(
        f"完成: p̂={report.p_hat:.6g} ± {report.std_err:.2g}, "
        f"期望Chernoff界={report.bound.expected_chernoff:.6g}"
    )
    return report


def conditional_key(stats: ConditionalStats, z0: np.ndarray, z1: np.ndarray) -> str:
    """条件试验的指纹：条件统计量加上 (z0, z1)"""
    return calculate_hash([stats.cond_cov, stats.gain, z0, z1])


def run_conditional(
    stats: ConditionalStats,
    z0,
    z1,
    trials: int,
    seed: int,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1
) -> TrialReport:
    """
    条件误码率估计：(z0, z1) 固定，y 直接按条件分布抽取

    z0 = z1 时不做模拟，直接返回 p̂ = 0.5、标准误 0。

    Args:
        stats: 条件统计量
        z0, z1: 部分信息
        trials: 试验次数
        seed: 种子
        block_size: 块大小
        workers: 并行数

    Returns:
        TrialReport，closed_form 字段为闭式条件误码率
    """
    z0 = np.asarray(z0, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    key = conditional_key(stats, z0, z1)
    closed = conditional_error_prob(stats, z0, z1)

    if np.array_equal(z0, z1):
        return TrialReport(
            errors=0, trials=0, p_hat=0.5, std_err=0.0,
            instance_key=key, closed_form=closed,
        )

    if trials < 1:
        raise ArgumentError(f"试验次数必须为正: {trials}")

    num_blocks = -(-trials // block_size)

    def task(block_id: int) -> TrialReport:
        count = min(block_size, trials - block_id * block_size)
        bits, y = sample_conditional(stats, z0, z1, RngStream(seed, block_id), count)
        decisions = map_decide_batch(stats, z0, z1, y)
        errors = int(np.count_nonzero(decisions != bits))
        return TrialReport.from_counts(errors, count, key, closed_form=closed)

    report = reduce_reports(_execute(task, list(range(num_blocks)), workers))
    logger.debug(f"条件试验: p̂={report.p_hat:.6g}, 闭式值={closed:.6g}")
    return report
