"""
实验配置

把合并后的配置字典转换为不可变的 ExperimentConfig，并在任何计算开始前完成校验
"""

from dataclasses import dataclass
from typing import Any, Optional, Tuple

from ..utils.errors import ConfigError
from ..utils.helpers import expand_range
from .config_manager import ConfigManager
from .settings import SWEEP_KINDS

MIN_TRIALS = 100


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{name} 必须是整数: {value!r}")
    return int(value)


def _as_float(value: Any, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} 必须是实数: {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """一次实验的全部参数"""

    kind: str
    n_values: Tuple[int, ...]
    m_values: Tuple[int, ...]
    snr_db_values: Tuple[float, ...]
    eig_range: Tuple[float, float]
    shared_eigenbasis: bool
    trials: int
    random_transforms: int
    seed: int
    output_path: Optional[str]
    workers: int = 1
    block_size: int = 10000
    float_digits: int = 12
    sigma_x: Any = None
    sigma_e: Any = None
    transform: Any = None

    @property
    def n(self) -> int:
        return self.n_values[0]

    @property
    def m(self) -> int:
        return self.m_values[0]

    @property
    def snr_db(self) -> float:
        return self.snr_db_values[0]

    @classmethod
    def from_config(cls, config: ConfigManager) -> 'ExperimentConfig':
        """
        从配置管理器构造并校验实验配置

        Args:
            config: 配置管理器

        Returns:
            ExperimentConfig
        """
        exp = config.get_experiment_config()
        mc = config.get_montecarlo_config()
        out = config.get_output_config()
        inspect = config.get_inspect_config()

        kind = exp.get('kind')

        n_values = tuple(_as_int(v, 'n') for v in expand_range(exp.get('n'), 'n'))
        m_values = tuple(_as_int(v, 'm') for v in expand_range(exp.get('m'), 'm'))
        # sweep-snr 优先使用 snr_sweep，其余实验使用单点 snr_db
        snr_key = 'snr_sweep' if kind == 'sweep-snr' and exp.get('snr_sweep') is not None else 'snr_db'
        snr_values = tuple(_as_float(v, snr_key) for v in expand_range(exp.get(snr_key), snr_key))

        eig_range = exp.get('eig_range')
        if not isinstance(eig_range, (list, tuple)) or len(eig_range) != 2:
            raise ConfigError(f"eig_range 必须是 [low, high]: {eig_range!r}")
        low, high = (_as_float(v, 'eig_range') for v in eig_range)
        if not 0 < low <= high:
            raise ConfigError(f"eig_range 必须满足 0 < low ≤ high: ({low}, {high})")

        output_path = out.get('path')
        if output_path:
            output_path = str(output_path).replace('{kind}', kind)

        cfg = cls(
            kind=kind,
            n_values=n_values,
            m_values=m_values,
            snr_db_values=snr_values,
            eig_range=(low, high),
            shared_eigenbasis=bool(exp.get('shared_eigenbasis', False)),
            trials=_as_int(exp.get('trials', 0), 'trials'),
            random_transforms=_as_int(exp.get('random_transforms', 0), 'random_transforms'),
            seed=_as_int(exp.get('seed'), 'seed'),
            output_path=output_path,
            workers=_as_int(mc.get('workers', 1), 'workers'),
            block_size=_as_int(mc.get('block_size', 10000), 'block_size'),
            float_digits=_as_int(out.get('float_digits', 12), 'float_digits'),
            sigma_x=inspect.get('sigma_x'),
            sigma_e=inspect.get('sigma_e'),
            transform=inspect.get('transform'),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        """校验取值；不可行的扫描点在开始计算前报错"""
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError(f"seed 必须是 64 位无符号整数: {self.seed}")
        if self.trials != 0 and self.trials < MIN_TRIALS:
            raise ConfigError(f"trials 为 0（不做模拟）或至少 {MIN_TRIALS}: {self.trials}")
        if self.random_transforms < 0:
            raise ConfigError(f"random_transforms 不能为负: {self.random_transforms}")
        if self.workers < 1 or self.block_size < 1:
            raise ConfigError(f"workers 和 block_size 必须为正: {self.workers}, {self.block_size}")
        if not 1 <= self.float_digits <= 17:
            raise ConfigError(f"float_digits 必须在 1..17 之间: {self.float_digits}")

        if self.kind == 'inspect':
            for name in ('sigma_x', 'sigma_e', 'transform'):
                if getattr(self, name) is None:
                    raise ConfigError(f"inspect 需要配置 inspect.{name}")
            return

        single = {
            'random-vs-opt': ('n_values', 'm_values', 'snr_db_values'),
            'sweep-snr': ('n_values', 'm_values'),
            'sweep-m': ('n_values', 'snr_db_values'),
            'sweep-n': ('m_values', 'snr_db_values'),
        }[self.kind]
        for name in single:
            if len(getattr(self, name)) != 1:
                raise ConfigError(f"{self.kind} 要求 {name[:-7]} 为单个值，实际 {getattr(self, name)}")

        if self.kind == 'random-vs-opt' and self.random_transforms < 1:
            raise ConfigError("random-vs-opt 要求 random_transforms ≥ 1")

        for n in self.n_values:
            for m in self.m_values:
                if not 0 < m < n:
                    raise ConfigError(f"扫描点不可行: 要求 0 < m < n，实际 m={m}, n={n}")

    @property
    def is_sweep(self) -> bool:
        return self.kind in SWEEP_KINDS
