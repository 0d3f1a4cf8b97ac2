"""
最优线性降维变换的构造

记 Σx = F Λ² F^T，P = Λ^{-1} F^T (Σx+Σe) F Λ^{-1} = U_p Λp U_p^T，Λ̂p = I - Λp^{-1}。
对列正交 M 定义 G(M) = 2^{-m} ∏ [1 + 1/λ_i(M^T Λ̂p M)]，则 T = E D M^T U_p^T Λ^{-1} F^T
满足 J(T) = G(M)；取 Λ̂p 最小的 m 个特征值对应的坐标方向得到最优 M。

最优值有两种单位：乘积形式（不含 2^{-m}）和 J 单位，二者只通过
product_to_j / j_to_product 转换。
"""

from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from ..detection.detector import expected_chernoff_bound
from ..linalg.eigen import as_sym_matrix, cholesky_lower, eig_sym, orthonormality_error
from ..linalg.sampling import RngStream
from ..models.problem import ProblemInstance, check_full_row_rank
from ..models.transform import OptimalTransform, TransformFactors
from ..utils.errors import (
    ArgumentError,
    ConsistencyError,
    NotPositiveDefiniteError,
    RankDeficiencyError,
)
from ..utils.logger import get_logger


logger = get_logger('design')

UNITARY_TOL = 1e-10
ORTHONORMAL_TOL = 1e-8
CONSISTENCY_RTOL = 1e-6


def product_to_j(value: float, m: int) -> float:
    """乘积形式 → J 单位"""
    return float(value) * 0.5 ** m


def j_to_product(value: float, m: int) -> float:
    """J 单位 → 乘积形式"""
    return float(value) * 2.0 ** m


def factorize(sigma_x, sigma_e, m: int) -> TransformFactors:
    """
    计算构造最优变换所需的分解

    Args:
        sigma_x: 信号协方差 (n×n)，正定
        sigma_e: 噪声协方差 (n×n)，正定
        m: 部分信息长度，m < n

    Returns:
        TransformFactors
    """
    sigma_x = as_sym_matrix(sigma_x, 'sigma_x')
    sigma_e = as_sym_matrix(sigma_e, 'sigma_e')
    n = sigma_x.shape[0]

    if sigma_e.shape != sigma_x.shape:
        raise ArgumentError(f"sigma_x {sigma_x.shape} 与 sigma_e {sigma_e.shape} 阶数不同")
    if not 0 < m < n:
        raise ArgumentError(f"要求 0 < m < n，实际 m={m}, n={n}")
    cholesky_lower(sigma_e, 'sigma_e')

    eig_x = eig_sym(sigma_x, order='descending')
    if eig_x.values[-1] <= 0.0:
        raise NotPositiveDefiniteError(
            f"sigma_x 不是正定矩阵: 最小特征值 {eig_x.values[-1]:.3e}",
            smallest_eigenvalue=float(eig_x.values[-1])
        )

    f = eig_x.vectors
    lam = np.sqrt(eig_x.values)
    scaled = f / lam                                # F Λ^{-1}

    # P = I + R，R = Λ^{-1} F^T Σe F Λ^{-1}；由 R 计算 Λ̂p 避免 1 - 1/Λp 的相消
    r = scaled.T @ sigma_e @ scaled
    r = 0.5 * (r + r.T)
    p = np.eye(n) + r

    eig_r = eig_sym(r, order='ascending')
    if eig_r.values[0] <= 0.0:
        raise ConsistencyError(f"Λ^{{-1}}F^TΣeFΛ^{{-1}} 出现非正特征值 {eig_r.values[0]:.3e}")

    lambda_p = 1.0 + eig_r.values
    lambda_hat = eig_r.values / lambda_p

    perm = np.argsort(lambda_hat, kind='stable')
    selection = perm[:m].copy()

    logger.debug(f"分解完成: n={n}, m={m}, Λ̂p ∈ [{lambda_hat[0]:.4g}, {lambda_hat[-1]:.4g}]")

    return TransformFactors(
        sigma_x=sigma_x,
        sigma_e=sigma_e,
        m=m,
        F=f,
        Lambda=lam,
        P=p,
        U_p=eig_r.vectors,
        Lambda_p=lambda_p,
        Lambda_hat=lambda_hat,
        perm=perm,
        selection=selection,
    )


def reselect(factors: TransformFactors, m: int) -> TransformFactors:
    """
    同一对协方差换一个 m：分解与 m 无关，只重新选取下标集合

    Args:
        factors: 已有分解
        m: 新的部分信息长度

    Returns:
        新的 TransformFactors
    """
    if not 0 < m < factors.n:
        raise ArgumentError(f"要求 0 < m < n，实际 m={m}, n={factors.n}")
    return replace(factors, m=m, selection=factors.perm[:m].copy())


def optimal_value(factors: TransformFactors) -> float:
    """
    最优值（乘积形式）∏_{i∈I} [1 + 1/λ_i(Λ̂p)]，I 为最小的 m 个特征值

    Args:
        factors: 分解结果

    Returns:
        乘积形式的最优值
    """
    selected = factors.Lambda_hat[factors.selection]
    return float(np.prod(1.0 + 1.0 / selected))


def _check_orthonormal(matrix: np.ndarray, name: str, tol: float) -> np.ndarray:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    err = orthonormality_error(matrix)
    if err > tol:
        raise ArgumentError(f"{name} 不满足列正交条件: ||{name}^T {name} - I|| = {err:.3e}")
    return matrix


def _reduced_spectrum(factors: TransformFactors, m_matrix: np.ndarray) -> np.ndarray:
    """M^T Λ̂p M 的特征值（升序）"""
    reduced = (m_matrix.T * factors.Lambda_hat) @ m_matrix
    return eig_sym(0.5 * (reduced + reduced.T), order='ascending').values


def g_of_m(factors: TransformFactors, m_matrix) -> float:
    """
    G(M) = 2^{-m} ∏ [1 + 1/λ_i(M^T Λ̂p M)]

    Args:
        factors: 分解结果
        m_matrix: n×m 列正交矩阵

    Returns:
        G(M)，J 单位
    """
    m_matrix = _check_orthonormal(m_matrix, 'M', ORTHONORMAL_TOL)
    if m_matrix.shape[0] != factors.n:
        raise ArgumentError(f"M 的行数应为 n={factors.n}，实际 {m_matrix.shape[0]}")

    spectrum = _reduced_spectrum(factors, m_matrix)
    return product_to_j(float(np.prod(1.0 + 1.0 / spectrum)), m_matrix.shape[1])


def interlacing_violation(factors: TransformFactors, m_matrix) -> float:
    """
    Poincaré 分隔定理的最大违反量

    对升序特征值检查 λ_i(Λ̂p) ≤ λ_i(M^T Λ̂p M) ≤ λ_{i+n-m}(Λ̂p)，
    返回 2m 个不等式中最大的违反量（全部成立时 ≤ 0）。
    """
    m_matrix = _check_orthonormal(m_matrix, 'M', ORTHONORMAL_TOL)
    k = m_matrix.shape[1]
    n = factors.n

    full = np.sort(factors.Lambda_hat)
    reduced = _reduced_spectrum(factors, m_matrix)

    lower_gap = full[:k] - reduced
    upper_gap = reduced - full[n - k:]
    return float(max(lower_gap.max(), upper_gap.max()))


def j_of_t(inst: ProblemInstance) -> float:
    """J(T) = det(I_m + W/2)"""
    return expected_chernoff_bound(inst).j_value


def _diag_entries(d: Optional[np.ndarray], m: int) -> np.ndarray:
    if d is None:
        return np.ones(m)
    d = np.asarray(d, dtype=float)
    if d.ndim == 2:
        if d.shape != (m, m) or np.any(np.abs(d - np.diag(np.diag(d))) > 0.0):
            raise ArgumentError("D 必须是 m×m 对角矩阵")
        d = np.diag(d)
    if d.shape != (m,):
        raise ArgumentError(f"D 应有 {m} 个对角元，实际形状 {d.shape}")
    if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
        raise ArgumentError(f"D 的对角元必须为正: {d}")
    return d


def _unitary(u: Optional[np.ndarray], m: int, name: str) -> np.ndarray:
    if u is None:
        return np.eye(m)
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape != (m, m):
        raise ArgumentError(f"{name} 应为 {m}×{m} 矩阵，实际 {u.shape}")
    return _check_orthonormal(u, name, UNITARY_TOL)


def transform_from_m(
    factors: TransformFactors,
    m_matrix,
    E: Optional[np.ndarray] = None,
    D: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    由列正交 M 装配 T = E D M^T U_p^T Λ^{-1} F^T

    Args:
        factors: 分解结果
        m_matrix: n×m 列正交矩阵
        E: m×m 正交矩阵，默认单位阵
        D: 正对角元（向量或对角矩阵），默认全 1

    Returns:
        m×n 变换矩阵
    """
    m_matrix = _check_orthonormal(m_matrix, 'M', ORTHONORMAL_TOL)
    k = m_matrix.shape[1]
    e = _unitary(E, k, 'E')
    d = _diag_entries(D, k)
    return (e * d) @ m_matrix.T @ factors.whitening


def selection_matrix(factors: TransformFactors, gamma: Optional[np.ndarray] = None) -> np.ndarray:
    """M = Q^T [Γ_m; 0]：选中坐标所在的行放置 Γ_m，其余为 0"""
    m = factors.m
    gamma = _unitary(gamma, m, 'Gamma')
    m_matrix = np.zeros((factors.n, m))
    m_matrix[factors.selection, :] = gamma
    return m_matrix


def build_optimal(
    factors: TransformFactors,
    E: Optional[np.ndarray] = None,
    D: Optional[np.ndarray] = None,
    Gamma: Optional[np.ndarray] = None
) -> OptimalTransform:
    """
    构造最优变换族中的一个成员

    Args:
        factors: 分解结果
        E: m×m 正交矩阵，默认单位阵
        D: 正对角元，默认全 1
        Gamma: m×m 正交矩阵 Γ_m，默认单位阵

    Returns:
        OptimalTransform
    """
    m = factors.m
    e = _unitary(E, m, 'E')
    d = _diag_entries(D, m)
    gamma = _unitary(Gamma, m, 'Gamma')

    m_matrix = selection_matrix(factors, gamma)
    t = transform_from_m(factors, m_matrix, e, d)

    inst = ProblemInstance(factors.sigma_x, factors.sigma_e, t)
    attained = j_of_t(inst)
    target = product_to_j(optimal_value(factors), m)

    if abs(attained - target) > CONSISTENCY_RTOL * target:
        raise ConsistencyError(
            f"最优变换达到的 J={attained:.12g} 与 G(M)={target:.12g} 不一致"
        )

    return OptimalTransform(
        T=t,
        E=e,
        D=d,
        Gamma=gamma,
        M=m_matrix,
        attained_j=attained,
        optimal_value=target,
    )


def lift_transform(inst: ProblemInstance, factors: TransformFactors) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    把任意满秩 T 写成 T = Ẽ D̃ M^T U_p^T Λ^{-1} F^T，其中 M 列正交

    对 T Σx T^T = Ẽ D̃² Ẽ^T 做特征分解（D̃ 降序，Ẽ 首行非负），
    取 M = U_p^T Λ F^T T^T Ẽ D̃^{-1}，则 G(M) = J(T)。

    Args:
        inst: 问题实例
        factors: 同一对协方差的分解结果

    Returns:
        (M, E, D)，D 为对角元向量
    """
    eig_z = eig_sym(inst.sigma_z, order='descending')
    if eig_z.values[-1] <= 0.0:
        raise RankDeficiencyError("T Σx T^T 非正定，T 不满秩")

    e = eig_z.vectors.copy()
    signs = np.where(e[0, :] < 0.0, -1.0, 1.0)
    e = e * signs
    d = np.sqrt(eig_z.values)

    # U_p^T Λ F^T T^T
    lifted = factors.U_p.T @ (factors.F * factors.Lambda).T @ inst.T.T
    m_matrix = lifted @ e / d
    return m_matrix, e, d


def random_full_rank_t(n: int, m: int, rng: RngStream) -> np.ndarray:
    """
    i.i.d. 标准高斯元素的随机满秩变换

    Args:
        n: 信号长度
        m: 部分信息长度，m < n
        rng: 随机数流

    Returns:
        m×n 矩阵
    """
    if not 0 < m < n:
        raise ArgumentError(f"要求 0 < m < n，实际 m={m}, n={n}")

    while True:
        t = rng.standard_normal((m, n))
        try:
            check_full_row_rank(t)
        except RankDeficiencyError:
            logger.warning("随机变换不满秩，重新抽取")
            continue
        return t
