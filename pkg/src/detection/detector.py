"""
部分信息下的 MAP 检测器

给定部分信息 (z0, z1)，接收信号 y 在 H_i 下服从 N(μ_{y_i|z_i}, Σ_{y|z})，
其中 Σ_{y|z} 与假设无关，因此白化矩阵只需计算一次
"""

from typing import Optional, Tuple

import numpy as np
from scipy.linalg import cho_solve

from ..linalg.eigen import cholesky_lower, inverse_lower, is_positive_definite
from ..linalg.qfunc import q_function
from ..linalg.sampling import RngStream, sample_gaussian_batch
from ..models.problem import BoundReport, Codebook, ConditionalStats, ProblemInstance
from ..utils.errors import (
    ArgumentError,
    ConsistencyError,
    NotPositiveDefiniteError,
    RankDeficiencyError,
)
from ..utils.logger import get_logger


logger = get_logger('detection')

TIE_TOL = 1e-12


def _sigma_z_factor(inst: ProblemInstance) -> np.ndarray:
    """T Σx T^T 的 Cholesky 因子；数值奇异说明 T 不满秩"""
    try:
        return cholesky_lower(inst.sigma_z, 'T Σx T^T')
    except NotPositiveDefiniteError as e:
        raise RankDeficiencyError(f"T Σx T^T 数值奇异，T 不满秩: {e}")


def conditional_stats(inst: ProblemInstance) -> ConditionalStats:
    """
    计算条件统计量

    gain = Σx T^T (T Σx T^T)^{-1}
    Σ_{y|z} = Σx + Σe - Σx T^T (T Σx T^T)^{-1} T Σx

    Args:
        inst: 问题实例

    Returns:
        ConditionalStats
    """
    lower_z = _sigma_z_factor(inst)
    k = inst.T @ inst.sigma_x                       # T Σx (m×n)
    gain = cho_solve((lower_z, True), k).T          # (Σz^{-1} T Σx)^T

    cond_cov = inst.sigma_x + inst.sigma_e - gain @ k
    cond_cov = 0.5 * (cond_cov + cond_cov.T)

    try:
        lower = cholesky_lower(cond_cov, 'Σ_{y|z}')
    except NotPositiveDefiniteError as e:
        raise ConsistencyError(f"条件协方差非正定: {e}")

    return ConditionalStats(
        cond_cov=cond_cov,
        gain=gain,
        whitener=inverse_lower(lower),
        cov_lower=lower,
    )


def _check_dims(stats: ConditionalStats, z0, z1, y=None) -> Tuple[np.ndarray, ...]:
    z0 = np.asarray(z0, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    if z0.shape[-1] != stats.m or z1.shape[-1] != stats.m:
        raise ArgumentError(f"z 的长度应为 m={stats.m}，实际 {z0.shape}, {z1.shape}")
    if y is None:
        return z0, z1
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != stats.n:
        raise ArgumentError(f"y 的长度应为 n={stats.n}，实际 {y.shape}")
    return z0, z1, y


def whitened_distances(stats: ConditionalStats, z0, z1, y) -> Tuple[np.ndarray, np.ndarray]:
    """两个假设下的白化距离平方 ||Σ^{-1/2}(y - μ_i)||²，支持批量"""
    z0, z1, y = _check_dims(stats, z0, z1, y)
    r0 = (y - stats.conditional_mean(z0)) @ stats.whitener.T
    r1 = (y - stats.conditional_mean(z1)) @ stats.whitener.T
    return np.sum(r0 * r0, axis=-1), np.sum(r1 * r1, axis=-1)


def map_decide_batch(stats: ConditionalStats, z0, z1, y) -> np.ndarray:
    """
    批量 MAP 判决

    Args:
        stats: 条件统计量
        z0, z1: 部分信息，(m,) 或 (batch, m)
        y: 接收信号，(n,) 或 (batch, n)

    Returns:
        0/1 判决数组；距离平方之差不超过 TIE_TOL 时判 0
    """
    d0, d1 = whitened_distances(stats, z0, z1, y)
    return (d0 - d1 > TIE_TOL).astype(int)


def map_decide(stats: ConditionalStats, z0, z1, y) -> int:
    """单次 MAP 判决，返回假设下标 0 或 1"""
    return int(map_decide_batch(stats, z0, z1, y))


def linear_statistic_decide(stats: ConditionalStats, z0, z1, y) -> int:
    """
    以线性统计量表示的同一判决规则

    θ = (μ0 - μ1)^T Σ^{-1} y，κ_i = μ_i^T Σ^{-1} μ_i，
    θ ≥ (κ0 - κ1)/2 时判 0
    """
    z0, z1, y = _check_dims(stats, z0, z1, y)
    w0 = stats.whitener @ stats.conditional_mean(z0)
    w1 = stats.whitener @ stats.conditional_mean(z1)
    wy = stats.whitener @ y

    theta = float((w0 - w1) @ wy)
    kappa0 = float(w0 @ w0)
    kappa1 = float(w1 @ w1)
    return int((kappa0 - kappa1) - 2.0 * theta > TIE_TOL)


def whitened_separation(stats: ConditionalStats, z0, z1) -> float:
    """||Σ_{y|z}^{-1/2} (μ_{y_0|z_0} - μ_{y_1|z_1})||"""
    z0, z1 = _check_dims(stats, z0, z1)
    diff = stats.whitener @ (stats.gain @ (z0 - z1))
    return float(np.linalg.norm(diff))


def conditional_error_prob(stats: ConditionalStats, z0, z1) -> float:
    """
    条件误码率 Q(||Σ^{-1/2}(μ0 - μ1)|| / 2)

    z0 = z1 时直接返回 0.5
    """
    z0, z1 = _check_dims(stats, z0, z1)
    if np.array_equal(z0, z1):
        return 0.5
    return q_function(whitened_separation(stats, z0, z1) / 2.0)


def chernoff_conditional(stats: ConditionalStats, z0, z1) -> float:
    """条件误码率的 Chernoff 上界 ½·exp(-||Σ^{-1/2}(μ0 - μ1)||²/8)"""
    z0, z1 = _check_dims(stats, z0, z1)
    if np.array_equal(z0, z1):
        return 0.5
    sep = whitened_separation(stats, z0, z1)
    return float(0.5 * np.exp(-sep * sep / 8.0))


def _positive_logdet(matrix: np.ndarray, what: str) -> float:
    sign, logdet = np.linalg.slogdet(matrix)
    if sign <= 0 or not np.isfinite(logdet):
        raise ConsistencyError(f"{what} 的行列式非正 (sign={sign}, logdet={logdet})")
    return float(logdet)


def w_matrix(inst: ProblemInstance, stats: Optional[ConditionalStats] = None) -> np.ndarray:
    """W = T Σx Σ_{y|z}^{-1} Σx T^T (T Σx T^T)^{-1}"""
    if stats is None:
        stats = conditional_stats(inst)
    lower_z = _sigma_z_factor(inst)
    k = inst.T @ inst.sigma_x
    a = k @ cho_solve((stats.cov_lower, True), k.T)
    a = 0.5 * (a + a.T)
    return cho_solve((lower_z, True), a).T


def expected_chernoff_bound(
    inst: ProblemInstance,
    stats: Optional[ConditionalStats] = None
) -> BoundReport:
    """
    期望 Chernoff 界 ½·det(I_m + W/2)^{-1/2}

    Args:
        inst: 问题实例
        stats: 已算好的条件统计量，可选

    Returns:
        BoundReport
    """
    if stats is None:
        stats = conditional_stats(inst)

    lower_z = _sigma_z_factor(inst)
    w = w_matrix(inst, stats)

    # 对 γ = z0 - z1 ~ N(0, 2Σz) 求期望时出现的矩阵必须正定
    inv_2sz = 0.5 * cho_solve((lower_z, True), np.eye(inst.m))
    g_whitened = stats.whitener @ stats.gain
    quad = inv_2sz + 0.25 * (g_whitened.T @ g_whitened)
    if not is_positive_definite(0.5 * (quad + quad.T)):
        raise ConsistencyError("(2Σz)^{-1} + G^T Σ_{y|z}^{-1} G / 4 非正定")

    logdet = _positive_logdet(np.eye(inst.m) + 0.5 * w, 'I + W/2')
    j_value = float(np.exp(logdet))
    if j_value < 1.0 - 1e-9:
        raise ConsistencyError(f"J = {j_value} < 1")

    report = BoundReport.from_j(max(j_value, 1.0))
    logger.debug(f"期望Chernoff界: n={inst.n}, m={inst.m}, J={report.j_value:.6g}, 界={report.expected_chernoff:.6g}")
    return report


def gaussian_bound(sigma_x, sigma_e) -> BoundReport:
    """
    m = n（T 可逆）时的界：J = det(I_n + ½ Σe^{-1} Σx)

    Args:
        sigma_x: 信号协方差
        sigma_e: 噪声协方差

    Returns:
        BoundReport
    """
    inv_le = inverse_lower(cholesky_lower(sigma_e, 'sigma_e'))
    cholesky_lower(sigma_x, 'sigma_x')
    b = inv_le @ np.asarray(sigma_x, dtype=float) @ inv_le.T
    b = 0.5 * (b + b.T)
    logdet = _positive_logdet(np.eye(b.shape[0]) + 0.5 * b, 'I + Σe^{-1}Σx/2')
    return BoundReport.from_j(float(np.exp(logdet)))


def sample_trials(
    inst: ProblemInstance,
    rng: RngStream,
    count: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    批量抽取试验: bit ~ Bernoulli(½)，x0, x1 ~ N(0, Σx)，e ~ N(0, Σe)，互相独立

    抽取顺序固定为 bit, x0, x1, e。

    Args:
        inst: 问题实例
        rng: 随机数流
        count: 试验次数

    Returns:
        (bits, x0, x1, e)，后三者为 (count, n)
    """
    lower_x = cholesky_lower(inst.sigma_x, 'sigma_x')
    lower_e = cholesky_lower(inst.sigma_e, 'sigma_e')

    bits = rng.bits(count)
    x0 = sample_gaussian_batch(lower_x, count, rng)
    x1 = sample_gaussian_batch(lower_x, count, rng)
    e = sample_gaussian_batch(lower_e, count, rng)
    return bits, x0, x1, e


def sample_trial(inst: ProblemInstance, rng: RngStream) -> Tuple[int, Codebook, np.ndarray]:
    """
    抽取一次试验

    Returns:
        (bit, codebook, y)，y = x_bit + e
    """
    bits, x0, x1, e = sample_trials(inst, rng, 1)
    bit = int(bits[0])
    codebook = Codebook.from_codewords(inst.T, x0[0], x1[0])
    y = (x1[0] if bit else x0[0]) + e[0]
    return bit, codebook, y


def sample_conditional(
    stats: ConditionalStats,
    z0,
    z1,
    rng: RngStream,
    count: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    给定 (z0, z1) 直接按条件分布抽取 y | H_i ~ N(μ_{y_i|z_i}, Σ_{y|z})

    Returns:
        (bits, y)，y 为 (count, n)
    """
    z0, z1 = _check_dims(stats, z0, z1)
    bits = rng.bits(count)
    means = np.where(bits[:, None] == 1, stats.conditional_mean(z1), stats.conditional_mean(z0))
    return bits, means + sample_gaussian_batch(stats.cov_lower, count, rng)
