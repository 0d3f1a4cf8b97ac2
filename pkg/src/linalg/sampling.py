"""
随机数流与高斯采样

RngStream 由 (seed, stream_id) 唯一确定，底层为 PCG64 + SeedSequence，
跨平台可复现。并行任务必须使用不同的 stream_id
"""

from typing import Tuple

import numpy as np
from scipy.linalg import qr

from ..utils.errors import ArgumentError
from .eigen import as_sym_matrix, cholesky_lower


DEFAULT_EIG_RANGE: Tuple[float, float] = (0.1, 2.0)


class RngStream:
    """可复现的随机数流（单一持有者）"""

    def __init__(self, seed: int, stream_id: int = 0):
        """
        初始化随机数流

        Args:
            seed: 64位种子
            stream_id: 流编号
        """
        if seed < 0 or stream_id < 0:
            raise ArgumentError(f"seed 和 stream_id 必须非负: ({seed}, {stream_id})")

        self.seed = int(seed)
        self.stream_id = int(stream_id)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def standard_normal(self, size) -> np.ndarray:
        return self.generator.standard_normal(size)

    def uniform(self, low: float, high: float, size) -> np.ndarray:
        return self.generator.uniform(low, high, size)

    def bits(self, size) -> np.ndarray:
        """等概率 0/1 比特"""
        return self.generator.integers(0, 2, size=size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def derive_seed(seed: int, *keys: int) -> int:
    """
    由主种子和若干整数键派生子种子

    Args:
        seed: 主种子
        keys: 区分用途的整数键（如扫描点序号）

    Returns:
        64位子种子
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_gaussian(mean, cov, rng: RngStream) -> np.ndarray:
    """
    从 N(mean, cov) 抽取一个样本

    Args:
        mean: 均值向量
        cov: 正定协方差矩阵
        rng: 随机数流

    Returns:
        样本向量
    """
    mean = np.asarray(mean, dtype=float)
    lower = cholesky_lower(cov, 'cov')
    if lower.shape[0] != mean.shape[0]:
        raise ArgumentError(f"维度不一致: mean {mean.shape[0]}，cov {lower.shape[0]}")

    return mean + lower @ rng.standard_normal(mean.shape[0])


def sample_gaussian_batch(lower: np.ndarray, count: int, rng: RngStream) -> np.ndarray:
    """
    按已有 Cholesky 因子批量抽取零均值样本

    Args:
        lower: 协方差的下三角 Cholesky 因子 (n×n)
        count: 样本数
        rng: 随机数流

    Returns:
        (count, n) 样本矩阵，每行一个样本
    """
    return rng.standard_normal((count, lower.shape[0])) @ lower.T


def _sign_fixed_qr(g: np.ndarray) -> np.ndarray:
    """对高斯矩阵做 QR，并按 R 对角元符号修正 Q，得到 Haar 分布"""
    q, r = qr(g, mode='economic')
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def random_haar_orthogonal(n: int, rng: RngStream) -> np.ndarray:
    """
    Haar 分布的 n×n 正交矩阵

    Args:
        n: 阶数
        rng: 随机数流

    Returns:
        正交矩阵
    """
    if n <= 0:
        raise ArgumentError(f"n 必须为正整数: {n}")
    return _sign_fixed_qr(rng.standard_normal((n, n)))


def random_spectrum(n: int, eig_low: float, eig_high: float, rng: RngStream) -> np.ndarray:
    """
    独立同分布 Uniform(eig_low, eig_high) 的特征值

    Args:
        n: 个数
        eig_low: 下界
        eig_high: 上界
        rng: 随机数流

    Returns:
        特征值向量
    """
    if n <= 0:
        raise ArgumentError(f"n 必须为正整数: {n}")
    if not 0 < eig_low <= eig_high:
        raise ArgumentError(f"特征值范围非法: ({eig_low}, {eig_high})")
    return rng.uniform(eig_low, eig_high, n)


def psd_from_basis(basis: np.ndarray, spectrum: np.ndarray) -> np.ndarray:
    """由正交基和特征值构造对称矩阵 Q diag(spectrum) Q^T"""
    matrix = (basis * spectrum) @ basis.T
    return 0.5 * (matrix + matrix.T)


def random_psd(n: int, eig_low: float, eig_high: float, rng: RngStream) -> np.ndarray:
    """
    随机正定矩阵 Q Λ Q^T：特征值均匀分布，Q 为 Haar 正交矩阵

    Args:
        n: 阶数
        eig_low: 特征值下界
        eig_high: 特征值上界
        rng: 随机数流

    Returns:
        对称正定矩阵
    """
    spectrum = random_spectrum(n, eig_low, eig_high, rng)
    basis = random_haar_orthogonal(n, rng)
    return as_sym_matrix(psd_from_basis(basis, spectrum), 'random_psd')


def random_orthonormal_columns(n: int, m: int, rng: RngStream) -> np.ndarray:
    """
    Haar 分布的列正交矩阵 M (n×m)，满足 M^T M = I_m

    Args:
        n: 行数
        m: 列数，m ≤ n
        rng: 随机数流

    Returns:
        n×m 列正交矩阵
    """
    if m <= 0 or n <= 0:
        raise ArgumentError(f"n, m 必须为正整数: n={n}, m={m}")
    if m > n:
        raise ArgumentError(f"要求 m ≤ n，实际 m={m}, n={n}")
    return _sign_fixed_qr(rng.standard_normal((n, m)))
