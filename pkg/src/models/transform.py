"""
最优变换数据模型

TransformFactors 保存构造最优变换所需的全部分解结果，
OptimalTransform 是最优变换族中的一个成员及其达到的界
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class TransformFactors:
    """
    由 (Σx, Σe, m) 得到的分解

    下标均从 0 开始。
    """

    sigma_x: np.ndarray     # Σx
    sigma_e: np.ndarray     # Σe
    m: int                  # 部分信息长度
    F: np.ndarray           # Σx 的特征向量 (n×n)，Σx = F Λ² F^T
    Lambda: np.ndarray      # Λ 的对角元（Σx 特征值的平方根），降序
    P: np.ndarray           # Λ^{-1} F^T (Σx+Σe) F Λ^{-1}
    U_p: np.ndarray         # P 的特征向量 (n×n)
    Lambda_p: np.ndarray    # P 的特征值，升序
    Lambda_hat: np.ndarray  # I - Λp^{-1} 的对角元，均在 (0, 1)
    perm: np.ndarray        # 使 Λ̂p 非降序的稳定排序
    selection: np.ndarray   # 最小的 m 个 Λ̂p 元素的下标

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def whitening(self) -> np.ndarray:
        """U_p^T Λ^{-1} F^T，最优变换中 M^T 右侧的公共因子"""
        return self.U_p.T @ (self.F / self.Lambda).T


@dataclass(frozen=True, eq=False)
class OptimalTransform:
    """最优变换族 T = E D M^T U_p^T Λ^{-1} F^T 中的一个成员"""

    T: np.ndarray               # m×n 变换
    E: np.ndarray               # m×m 正交矩阵
    D: np.ndarray               # m 个正的对角元
    Gamma: np.ndarray           # m×m 正交矩阵 (Γ_m)
    M: np.ndarray               # n×m 列正交矩阵
    attained_j: float           # J(T)
    optimal_value: float        # 最优值，J 单位（乘积形式 × 2^{-m}）

    @property
    def m(self) -> int:
        return self.T.shape[0]

    @property
    def bound(self) -> float:
        """达到的期望 Chernoff 界"""
        return 0.5 / float(np.sqrt(self.attained_j))
