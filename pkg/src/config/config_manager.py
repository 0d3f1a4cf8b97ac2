"""
配置管理器

负责加载、验证、访问配置信息
"""

import copy
import os
from typing import Any, Dict, Optional

import yaml

from ..utils.errors import ConfigError
from .settings import DEFAULT_CONFIG, EXPERIMENT_KINDS


class ConfigManager:
    """配置管理器类"""

    def __init__(self, config_path: Optional[str] = "config/config.yaml", data: Optional[Dict[str, Any]] = None):
        """
        初始化配置管理器

        Args:
            config_path: 配置文件路径；为 None 时只使用 data 和默认配置
            data: 直接给出的配置字典（优先于文件）
        """
        self.config_path = config_path
        self.config: Dict[str, Any] = {}
        self._load(data)

    def _load(self, data: Optional[Dict[str, Any]] = None) -> None:
        """加载配置文件"""
        if data is None and self.config_path is not None:
            if not os.path.exists(self.config_path):
                raise ConfigError(f"配置文件不存在: {self.config_path}")

            try:
                with open(self.config_path, 'r', encoding='utf-8') as f:
                    data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"配置文件格式错误: {e}")

        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("配置文件顶层必须是键值映射")

        # 合并默认配置
        self.config = self._merge_defaults(data, copy.deepcopy(DEFAULT_CONFIG))
        self.validate()

    def _merge_defaults(self, config: Dict, defaults: Dict) -> Dict:
        """
        合并默认配置

        Args:
            config: 用户配置
            defaults: 默认配置

        Returns:
            合并后的配置
        """
        result = defaults.copy()

        for key, value in config.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._merge_defaults(value, result[key])
            else:
                result[key] = value

        return result

    def validate(self) -> None:
        """验证配置的结构，取值合法性由 ExperimentConfig 负责"""
        for key in ('experiment', 'montecarlo', 'output', 'logging'):
            if not isinstance(self.config.get(key), dict):
                raise ConfigError(f"配置中缺少 '{key}' 部分")

        kind = self.get('experiment.kind')
        if kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"未知的实验类型: {kind}，可选 {', '.join(EXPERIMENT_KINDS)}")

    def get(self, key: str, default: Any = None) -> Any:
        """
        获取配置值

        Args:
            key: 配置键，支持点号分隔的嵌套键，如 'experiment.seed'
            default: 默认值

        Returns:
            配置值
        """
        value = self.config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """按点号分隔的键设置配置值"""
        keys = key.split('.')
        target = self.config
        for k in keys[:-1]:
            target = target.setdefault(k, {})
        target[keys[-1]] = value

    def apply_overrides(self, overrides: Dict[str, Any]) -> None:
        """
        应用命令行覆盖项，值为 None 的项被忽略

        Args:
            overrides: {点号键: 值}
        """
        for key, value in overrides.items():
            if value is not None:
                self.set(key, value)
        self.validate()

    def get_experiment_config(self) -> Dict[str, Any]:
        """获取实验配置"""
        return self.config.get('experiment', {})

    def get_inspect_config(self) -> Dict[str, Any]:
        """获取单实例检查配置"""
        return self.config.get('inspect', {})

    def get_montecarlo_config(self) -> Dict[str, Any]:
        """获取蒙特卡洛配置"""
        return self.config.get('montecarlo', {})

    def get_output_config(self) -> Dict[str, Any]:
        """获取输出配置"""
        return self.config.get('output', {})

    def get_logging_config(self) -> Dict[str, Any]:
        """获取日志配置"""
        return self.config.get('logging', {})
