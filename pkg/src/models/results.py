"""
实验结果数据模型

蒙特卡洛统计结果、扫描表格的行以及单实例检查报告
"""

from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

import numpy as np

from .problem import BoundReport


def binomial_std_err(p_hat: float, trials: int) -> float:
    """二项比例的标准误 √(p̂(1-p̂)/N)"""
    if trials <= 0:
        return 0.0
    return float(np.sqrt(p_hat * (1.0 - p_hat) / trials))


@dataclass(frozen=True)
class TrialReport:
    """蒙特卡洛误码统计"""

    errors: int                             # 错误判决次数
    trials: int                             # 试验次数
    p_hat: float                            # 经验误码率
    std_err: float                          # √(p̂(1-p̂)/N)
    instance_key: str                       # 问题实例指纹
    bound: Optional[BoundReport] = None     # 期望 Chernoff 界（无条件试验）
    closed_form: Optional[float] = None     # 条件误码率闭式值（条件试验）

    @classmethod
    def from_counts(
        cls,
        errors: int,
        trials: int,
        instance_key: str,
        bound: Optional[BoundReport] = None,
        closed_form: Optional[float] = None
    ) -> 'TrialReport':
        p_hat = errors / trials if trials > 0 else 0.5
        return cls(
            errors=int(errors),
            trials=int(trials),
            p_hat=float(p_hat),
            std_err=binomial_std_err(p_hat, trials),
            instance_key=instance_key,
            bound=bound,
            closed_form=closed_form,
        )

    def confidence_interval(self, z: float = 1.96) -> Tuple[float, float]:
        """正态近似置信区间，截断到 [0, 1]"""
        half = z * self.std_err
        return max(0.0, self.p_hat - half), min(1.0, self.p_hat + half)


@dataclass(frozen=True)
class SweepRow:
    """扫描实验的一行"""

    x: float                                    # 自变量：SNR(dB)、m 或 n
    j_opt: float                                # 最优变换的 J 值
    bound_opt: float                            # 最优变换的期望 Chernoff 界
    bound_best_random: Optional[float] = None   # 随机变换中最好的界
    p_hat: Optional[float] = None               # 最优变换下的经验误码率
    std_err: Optional[float] = None

    def values(self) -> List[Optional[float]]:
        return [self.x, self.j_opt, self.bound_opt, self.bound_best_random, self.p_hat, self.std_err]


@dataclass(frozen=True)
class TransformRow:
    """随机变换与最优变换对比实验的一行"""

    index: int
    label: str                  # 'random' 或 'optimal'
    j_value: float
    bound: float
    ratio_to_optimal: Optional[float] = None   # bound / 最优界，≥ 1

    @property
    def reciprocal_bound(self) -> float:
        return 1.0 / self.bound

    def values(self) -> List[Any]:
        return [self.index, self.label, self.j_value, self.bound, self.reciprocal_bound, self.ratio_to_optimal]


@dataclass(frozen=True)
class InspectReport:
    """单实例检查结果"""

    n: int
    m: int
    rank_ratio: float
    cond_cov_spectrum: List[float]
    j_value: float
    expected_chernoff: float
    optimal_j: float            # J 单位的最优值
    optimal_product: float      # 乘积形式的最优值
    optimal_bound: float
    gap: float                  # optimal_j - j_value，≥ 0
