"""
对称矩阵特征分解与 Cholesky 分解

特征分解使用循环 Jacobi 旋转（本系统的矩阵阶数不超过几百），
Cholesky 分解调用 LAPACK dpotrf 以便报告失败的主元位置
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, solve_triangular

from ..utils.errors import ArgumentError, ConvergenceError, NotPositiveDefiniteError
from ..utils.logger import get_logger


logger = get_logger('linalg')

SYMMETRY_RTOL = 1e-12
ORDERS = ('ascending', 'descending')


def as_sym_matrix(a, name: str = 'matrix') -> np.ndarray:
    """
    校验并返回对称矩阵（副本）

    Args:
        a: 类数组输入
        name: 名称（用于报错）

    Returns:
        float 类型的对称方阵
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ArgumentError(f"{name} 必须是非空方阵，实际形状 {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ArgumentError(f"{name} 包含非有限数值")

    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYMMETRY_RTOL * scale:
        raise ArgumentError(f"{name} 不对称 (最大偏差 {asym:.3e})")

    # 消除舍入级别的不对称
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class EigenPair:
    """特征分解结果：A = V diag(values) V^T"""

    vectors: np.ndarray     # 列为特征向量的正交矩阵
    values: np.ndarray      # 按调用方指定顺序排列的特征值

    def reconstruct(self) -> np.ndarray:
        """重构原矩阵"""
        return (self.vectors * self.values) @ self.vectors.T


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """对 (p, q) 位置做一次 Jacobi 旋转，原地更新 a 和 v，a 保持严格对称"""
    apq = a[p, q]
    app = a[p, p]
    aqq = a[q, q]
    theta = (aqq - app) / (2.0 * apq)

    if abs(theta) > 1e150:
        t = 0.5 / theta
    elif theta >= 0.0:
        t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
    else:
        t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))

    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    new_p = c * col_p - s * col_q
    new_q = s * col_p + c * col_q
    a[:, p] = new_p
    a[p, :] = new_p
    a[:, q] = new_q
    a[q, :] = new_q

    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = 0.0
    a[q, p] = 0.0

    vec_p = v[:, p].copy()
    vec_q = v[:, q].copy()
    v[:, p] = c * vec_p - s * vec_q
    v[:, q] = s * vec_p + c * vec_q


def _off_diagonal(a: np.ndarray) -> np.ndarray:
    """非对角部分"""
    return a - np.diag(np.diag(a))


def eig_sym(
    a,
    order: str = 'ascending',
    tol: float = 1e-13,
    max_sweeps: int = 100
) -> EigenPair:
    """
    对称矩阵的完整特征分解（循环 Jacobi 法）

    收敛判据为最大非对角元 ≤ tol·||A||_F；特征值按 order 排序，
    相等特征值保持原始下标顺序（稳定排序）。

    Args:
        a: 对称矩阵
        order: 'ascending' 或 'descending'
        tol: 相对收敛阈值（最大非对角元 / 矩阵 Frobenius 范数）
        max_sweeps: 最大扫描轮数

    Returns:
        EigenPair
    """
    if order not in ORDERS:
        raise ArgumentError(f"未知的排序方式: {order}")

    work = as_sym_matrix(a)
    n = work.shape[0]
    vectors = np.eye(n)

    threshold = tol * float(np.linalg.norm(work))
    # 低于此值的非对角元直接置零，不再旋转
    negligible = 1e-3 * threshold

    off_max = float(np.max(np.abs(_off_diagonal(work))))
    sweeps = 0
    while off_max > threshold:
        if sweeps >= max_sweeps:
            residual = float(np.linalg.norm(_off_diagonal(work)))
            raise ConvergenceError(f"Jacobi 迭代 {max_sweeps} 轮未收敛 (n={n})", residual=residual)

        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(work[p, q]) <= negligible:
                    work[p, q] = 0.0
                    work[q, p] = 0.0
                else:
                    _rotate(work, vectors, p, q)

        sweeps += 1
        off_max = float(np.max(np.abs(_off_diagonal(work))))

    values = np.diag(work).copy()
    if order == 'ascending':
        idx = np.argsort(values, kind='stable')
    else:
        idx = np.argsort(-values, kind='stable')

    logger.debug(f"Jacobi 分解完成: n={n}, 轮数={sweeps}, 最大非对角元={off_max:.3e}")
    return EigenPair(vectors=vectors[:, idx], values=values[idx])


def cholesky_lower(a, name: str = 'matrix') -> np.ndarray:
    """
    下三角 Cholesky 分解 a = L L^T

    Args:
        a: 对称正定矩阵
        name: 名称（用于报错）

    Returns:
        下三角矩阵 L
    """
    a = as_sym_matrix(a, name)
    factor, info = lapack.dpotrf(a, lower=1, clean=1)

    if info > 0:
        pivot = info - 1
        raise NotPositiveDefiniteError(
            f"{name} 不是正定矩阵: 第 {pivot} 个主元非正",
            pivot=pivot
        )
    if info < 0:
        raise ArgumentError(f"dpotrf 参数错误 (info={info})")

    return np.tril(factor)


def is_positive_definite(a) -> bool:
    """检查矩阵是否正定（所有 Cholesky 主元为正）"""
    try:
        cholesky_lower(a)
    except NotPositiveDefiniteError:
        return False
    return True


def inverse_lower(lower: np.ndarray) -> np.ndarray:
    """下三角矩阵求逆"""
    return solve_triangular(lower, np.eye(lower.shape[0]), lower=True)


def spd_inverse(a, name: str = 'matrix') -> np.ndarray:
    """
    对称正定矩阵求逆（经 Cholesky 分解）

    Args:
        a: 对称正定矩阵
        name: 名称（用于报错）

    Returns:
        对称的逆矩阵
    """
    inv_l = inverse_lower(cholesky_lower(a, name))
    inv = inv_l.T @ inv_l
    return 0.5 * (inv + inv.T)


def orthonormality_error(m: np.ndarray) -> float:
    """返回 ||M^T M - I||_F，用于判断列正交性"""
    m = np.asarray(m, dtype=float)
    return float(np.linalg.norm(m.T @ m - np.eye(m.shape[1])))


def singular_ratio(t: np.ndarray) -> float:
    """
    最小奇异值与最大奇异值之比

    Args:
        t: 矩阵

    Returns:
        比值；全零矩阵返回 0.0
    """
    sv = np.linalg.svd(np.asarray(t, dtype=float), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0.0
    return float(sv[-1] / sv[0])
