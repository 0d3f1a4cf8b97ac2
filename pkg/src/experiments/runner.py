"""
实验调度器

负责按配置生成协方差、构造最优变换并执行扫描实验或单实例检查
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, List, Sequence, Tuple, TypeVar

import numpy as np

from ..config.experiment import ExperimentConfig
from ..design.optimal import (
    build_optimal,
    factorize,
    optimal_value,
    product_to_j,
    random_full_rank_t,
    reselect,
)
from ..detection.detector import conditional_stats, expected_chernoff_bound
from ..linalg.eigen import eig_sym
from ..linalg.sampling import (
    RngStream,
    derive_seed,
    psd_from_basis,
    random_haar_orthogonal,
    random_spectrum,
)
from ..models.problem import ProblemInstance
from ..models.results import InspectReport, SweepRow, TransformRow
from ..montecarlo.engine import TrialPlan, run_unconditional
from ..utils.errors import ConfigError, ConsistencyError
from ..utils.helpers import as_matrix
from ..utils.logger import get_logger

# 随机数流用途编号
STREAM_SIGMA_X = 0
STREAM_SIGMA_E = 1
STREAM_TRANSFORMS = 2
STREAM_TRIALS = 3

GAP_RTOL = 1e-9

R = TypeVar('R')


def snr_scale(sigma_x: np.ndarray, sigma_e: np.ndarray, snr_db: float) -> np.ndarray:
    """
    缩放噪声协方差使 tr(Σx)/tr(Σe) 等于目标 SNR

    Args:
        sigma_x: 信号协方差
        sigma_e: 噪声协方差
        snr_db: 目标 SNR (dB)，SNR_dB = 10·log10(迹比)

    Returns:
        缩放后的噪声协方差
    """
    ratio = 10.0 ** (snr_db / 10.0)
    return sigma_e * (np.trace(sigma_x) / (ratio * np.trace(sigma_e)))


def snr_db_of(sigma_x: np.ndarray, sigma_e: np.ndarray) -> float:
    """实际 SNR (dB)"""
    return float(10.0 * np.log10(np.trace(sigma_x) / np.trace(sigma_e)))


class ExperimentRunner:
    """实验调度器类"""

    def __init__(self, cfg: ExperimentConfig):
        """
        初始化实验调度器

        Args:
            cfg: 已校验的实验配置
        """
        self.cfg = cfg
        self.logger = get_logger('experiments')

    def draw_covariances(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        按配置抽取 (Σx, Σe)，特征值在 eig_range 内均匀分布

        Args:
            n: 阶数

        Returns:
            (Σx, Σe)，尚未按 SNR 缩放
        """
        low, high = self.cfg.eig_range
        rng_x = RngStream(self.cfg.seed, STREAM_SIGMA_X)
        rng_e = RngStream(self.cfg.seed, STREAM_SIGMA_E)

        basis_x = random_haar_orthogonal(n, rng_x)
        spectrum_x = random_spectrum(n, low, high, rng_x)
        if self.cfg.shared_eigenbasis:
            basis_e = basis_x
        else:
            basis_e = random_haar_orthogonal(n, rng_e)
        spectrum_e = random_spectrum(n, low, high, rng_e)

        return psd_from_basis(basis_x, spectrum_x), psd_from_basis(basis_e, spectrum_e)

    def _map_points(self, func: Callable[[int], R], count: int) -> List[R]:
        """并行执行各扫描点，结果按扫描点顺序返回"""
        if self.cfg.workers <= 1 or count <= 1:
            return [func(k) for k in range(count)]
        with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
            return list(pool.map(func, range(count)))

    def _random_bounds(self, sigma_x: np.ndarray, sigma_e: np.ndarray, m: int, count: int, point: int) -> List[float]:
        """在一个扫描点上评估 count 个随机变换的期望 Chernoff 界"""
        n = sigma_x.shape[0]
        rng = RngStream(derive_seed(self.cfg.seed, STREAM_TRANSFORMS, point))
        bounds = []
        for _ in range(count):
            t = random_full_rank_t(n, m, rng)
            bounds.append(expected_chernoff_bound(ProblemInstance(sigma_x, sigma_e, t)).expected_chernoff)
        return bounds

    def run_random_vs_opt(self) -> List[TransformRow]:
        """
        随机变换与最优变换的对比

        共 random_transforms 个随机变换，最优变换插在中间位置。

        Returns:
            每个变换一行
        """
        cfg = self.cfg
        n, m = cfg.n, cfg.m
        self.logger.info(f"随机变换对比实验: n={n}, m={m}, SNR={cfg.snr_db} dB, 随机变换 {cfg.random_transforms} 个")

        sigma_x, sigma_e = self.draw_covariances(n)
        sigma_e = snr_scale(sigma_x, sigma_e, cfg.snr_db)
        opt = build_optimal(factorize(sigma_x, sigma_e, m))

        rng = RngStream(derive_seed(cfg.seed, STREAM_TRANSFORMS, 0))
        middle = cfg.random_transforms // 2
        rows: List[TransformRow] = []

        for index in range(cfg.random_transforms + 1):
            if index == middle:
                rows.append(TransformRow(index, 'optimal', opt.attained_j, opt.bound))
                continue
            t = random_full_rank_t(n, m, rng)
            report = expected_chernoff_bound(ProblemInstance(sigma_x, sigma_e, t))
            rows.append(TransformRow(index, 'random', report.j_value, report.expected_chernoff))

        best_random = max(r.j_value for r in rows if r.label == 'random')
        if best_random > opt.attained_j * (1.0 + 1e-8):
            raise ConsistencyError(
                f"随机变换的 J={best_random:.12g} 超过最优值 {opt.attained_j:.12g}"
            )

        rows = [replace(r, ratio_to_optimal=r.bound / opt.bound) for r in rows]
        ratio = best_random_ratio(rows)
        self.logger.info(f"最优界={opt.bound:.6g}，最好的随机界/最优界={ratio:.4g}")
        return rows

    def sweep_points(self) -> Tuple[List[float], Callable[[int], Tuple[np.ndarray, np.ndarray, int]]]:
        """
        生成扫描点，每个点上 Σe 都已缩放到该点的目标 SNR

        Returns:
            (自变量列表, 序号 → (Σx, Σe, m) 的函数)
        """
        cfg = self.cfg

        if cfg.kind == 'sweep-snr':
            sigma_x, base_e = self.draw_covariances(cfg.n)
            values = list(cfg.snr_db_values)
            return values, lambda k: (sigma_x, snr_scale(sigma_x, base_e, values[k]), cfg.m)

        if cfg.kind == 'sweep-m':
            sigma_x, base_e = self.draw_covariances(cfg.n)
            sigma_e = snr_scale(sigma_x, base_e, cfg.snr_db)
            values = list(cfg.m_values)
            return values, lambda k: (sigma_x, sigma_e, values[k])

        if cfg.kind == 'sweep-n':
            # 嵌套实例：在最大 n 上抽取，各点取左上角主子阵后再缩放
            sigma_x, base_e = self.draw_covariances(max(cfg.n_values))
            values = list(cfg.n_values)

            def point(k: int) -> Tuple[np.ndarray, np.ndarray, int]:
                n = values[k]
                block_x = sigma_x[:n, :n]
                return block_x, snr_scale(block_x, base_e[:n, :n], cfg.snr_db), cfg.m

            return values, point

        raise ConfigError(f"{cfg.kind} 不是扫描实验")

    def run_sweep(self) -> List[SweepRow]:
        """
        执行 SNR / m / n 扫描

        Returns:
            每个扫描点一行，按扫描顺序排列
        """
        cfg = self.cfg
        values, point_of = self.sweep_points()
        self.logger.info(f"开始扫描 {cfg.kind}: 共 {len(values)} 个点, workers={cfg.workers}")

        shared_factors = None
        if cfg.kind == 'sweep-m':
            sigma_x, sigma_e, _ = point_of(0)
            shared_factors = factorize(sigma_x, sigma_e, min(cfg.m_values))

        def run_point(k: int) -> SweepRow:
            sigma_x, sigma_e, m = point_of(k)
            if shared_factors is not None:
                factors = reselect(shared_factors, m)
            else:
                factors = factorize(sigma_x, sigma_e, m)
            opt = build_optimal(factors)

            best_random = None
            if cfg.random_transforms > 0:
                best_random = min(self._random_bounds(sigma_x, sigma_e, m, cfg.random_transforms, k))

            p_hat = std_err = None
            if cfg.trials > 0:
                plan = TrialPlan(
                    instance=ProblemInstance(sigma_x, sigma_e, opt.T),
                    trials=cfg.trials,
                    seed=derive_seed(cfg.seed, STREAM_TRIALS, k),
                    block_size=cfg.block_size,
                )
                report = run_unconditional(plan)
                p_hat, std_err = report.p_hat, report.std_err

            self.logger.debug(f"扫描点 {values[k]}: J={opt.attained_j:.6g}, 界={opt.bound:.6g}")
            return SweepRow(
                x=values[k],
                j_opt=opt.attained_j,
                bound_opt=opt.bound,
                bound_best_random=best_random,
                p_hat=p_hat,
                std_err=std_err,
            )

        rows = self._map_points(run_point, len(values))
        self.logger.info(f"扫描完成 {cfg.kind}")
        return rows

    def inspect(self) -> InspectReport:
        """
        单实例检查：秩、条件协方差谱、J 值、期望 Chernoff 界、最优值和差距

        Returns:
            InspectReport
        """
        cfg = self.cfg
        sigma_x = as_matrix(cfg.sigma_x, 'inspect.sigma_x', square=True)
        sigma_e = as_matrix(cfg.sigma_e, 'inspect.sigma_e', square=True)
        t = as_matrix(cfg.transform, 'inspect.transform')

        inst = ProblemInstance(sigma_x, sigma_e, t)
        stats = conditional_stats(inst)
        bound = expected_chernoff_bound(inst, stats)

        product = optimal_value(factorize(sigma_x, sigma_e, inst.m))
        optimal_j = product_to_j(product, inst.m)
        gap = optimal_j - bound.j_value
        if abs(gap) <= GAP_RTOL * optimal_j:
            gap = 0.0

        spectrum = eig_sym(stats.cond_cov, order='ascending').values
        self.logger.info(f"检查实例: n={inst.n}, m={inst.m}, J={bound.j_value:.6g}, 最优J={optimal_j:.6g}")

        return InspectReport(
            n=inst.n,
            m=inst.m,
            rank_ratio=inst.rank_ratio,
            cond_cov_spectrum=[float(v) for v in spectrum],
            j_value=bound.j_value,
            expected_chernoff=bound.expected_chernoff,
            optimal_j=optimal_j,
            optimal_product=product,
            optimal_bound=0.5 / float(np.sqrt(optimal_j)),
            gap=gap,
        )


def best_random_ratio(rows: Sequence[TransformRow]) -> float:
    """最好的随机变换界与最优界之比（≥ 1）"""
    optimal = [r.bound for r in rows if r.label == 'optimal']
    randoms = [r.bound for r in rows if r.label == 'random']
    if not optimal or not randoms:
        raise ConfigError("对比结果中缺少最优或随机变换")
    return min(randoms) / optimal[0]
