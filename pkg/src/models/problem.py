"""
问题实例数据模型

定义部分信息检测问题的统计描述、码本、条件统计量和界的结果
"""

from dataclasses import dataclass, field

import numpy as np

from ..linalg.eigen import as_sym_matrix, cholesky_lower, singular_ratio
from ..utils.errors import ArgumentError, RankDeficiencyError
from ..utils.helpers import calculate_hash


RANK_RTOL = 1e-10


def check_full_row_rank(t: np.ndarray, name: str = 'T') -> float:
    """
    检查矩阵行满秩：最小奇异值 > RANK_RTOL × 最大奇异值

    Args:
        t: m×n 矩阵
        name: 名称（用于报错）

    Returns:
        奇异值比
    """
    ratio = singular_ratio(t)
    if ratio <= RANK_RTOL:
        raise RankDeficiencyError(
            f"{name} 不满秩: 最小/最大奇异值比 {ratio:.3e} ≤ {RANK_RTOL:g}",
            ratio=ratio
        )
    return ratio


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """系统的完整统计描述: x_i ~ N(0, Σx)，e ~ N(0, Σe)，z_i = T x_i"""

    sigma_x: np.ndarray         # 原始信号协方差 (n×n)
    sigma_e: np.ndarray         # 加性噪声协方差 (n×n)
    T: np.ndarray               # 降维变换 (m×n)
    rank_ratio: float = field(init=False, repr=False)

    def __post_init__(self):
        sigma_x = as_sym_matrix(self.sigma_x, 'sigma_x')
        sigma_e = as_sym_matrix(self.sigma_e, 'sigma_e')
        t = np.atleast_2d(np.array(self.T, dtype=float))

        if sigma_x.shape != sigma_e.shape:
            raise ArgumentError(f"sigma_x {sigma_x.shape} 与 sigma_e {sigma_e.shape} 阶数不同")
        if t.ndim != 2 or t.shape[1] != sigma_x.shape[0]:
            raise ArgumentError(f"T 的形状 {t.shape} 与 n={sigma_x.shape[0]} 不匹配")
        if not np.all(np.isfinite(t)):
            raise ArgumentError("T 包含非有限数值")
        if t.shape[0] >= t.shape[1]:
            raise ArgumentError(f"要求 m < n，实际 m={t.shape[0]}, n={t.shape[1]}")

        cholesky_lower(sigma_x, 'sigma_x')
        cholesky_lower(sigma_e, 'sigma_e')
        ratio = check_full_row_rank(t)

        object.__setattr__(self, 'sigma_x', sigma_x)
        object.__setattr__(self, 'sigma_e', sigma_e)
        object.__setattr__(self, 'T', t)
        object.__setattr__(self, 'rank_ratio', ratio)

    @property
    def n(self) -> int:
        return self.sigma_x.shape[0]

    @property
    def m(self) -> int:
        return self.T.shape[0]

    @property
    def sigma_z(self) -> np.ndarray:
        """部分信息的协方差 T Σx T^T"""
        s = self.T @ self.sigma_x @ self.T.T
        return 0.5 * (s + s.T)

    def with_transform(self, t: np.ndarray) -> 'ProblemInstance':
        """相同协方差、更换变换矩阵"""
        return ProblemInstance(self.sigma_x, self.sigma_e, t)

    def key(self) -> str:
        """实例指纹，用于校验蒙特卡洛结果是否来自同一实例"""
        return calculate_hash([self.sigma_x, self.sigma_e, self.T])


@dataclass(frozen=True, eq=False)
class Codebook:
    """发送端码字与接收端的部分信息"""

    x0: np.ndarray      # 发送端码字 (n)
    x1: np.ndarray
    z0: np.ndarray      # 部分信息 z_i = T x_i (m)
    z1: np.ndarray

    @classmethod
    def from_codewords(cls, t: np.ndarray, x0: np.ndarray, x1: np.ndarray) -> 'Codebook':
        """由码字计算部分信息，z 不单独给出"""
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        return cls(x0=x0, x1=x1, z0=t @ x0, z1=t @ x1)


@dataclass(frozen=True, eq=False)
class ConditionalStats:
    """给定部分信息后检测器所需的全部统计量"""

    cond_cov: np.ndarray    # Σ_{y|z} (n×n)，与假设无关
    gain: np.ndarray        # Σx T^T (T Σx T^T)^{-1} (n×m)，z_i ↦ μ_{y_i|z_i}
    whitener: np.ndarray    # 下三角 L^{-1}，满足 whitener^T whitener = Σ_{y|z}^{-1}
    cov_lower: np.ndarray   # Σ_{y|z} 的 Cholesky 因子 L

    @property
    def n(self) -> int:
        return self.gain.shape[0]

    @property
    def m(self) -> int:
        return self.gain.shape[1]

    def conditional_mean(self, z: np.ndarray) -> np.ndarray:
        """μ_{y|z}；z 可以是 (m,) 或 (batch, m)"""
        return np.asarray(z, dtype=float) @ self.gain.T


@dataclass(frozen=True)
class BoundReport:
    """期望 Chernoff 界"""

    j_value: float              # det(I_m + W/2) ≥ 1
    expected_chernoff: float    # ½ · j_value^{-1/2}

    @classmethod
    def from_j(cls, j_value: float) -> 'BoundReport':
        return cls(j_value=float(j_value), expected_chernoff=0.5 / float(np.sqrt(j_value)))
