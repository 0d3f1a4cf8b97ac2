"""
辅助函数模块

提供矩阵文本解析、数值格式化、目录与哈希等通用函数
"""

import os
import hashlib
from typing import Any, Iterable, List, Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, MatrixParseError


Number = Union[int, float]


def parse_matrix_text(text: str, source: str = '<text>') -> np.ndarray:
    """
    解析矩阵文本：每行一行矩阵，元素以空白分隔

    空行和以 # 开头的行会被跳过。

    Args:
        text: 文本内容
        source: 来源描述（用于报错）

    Returns:
        二维 float 数组
    """
    rows: List[List[float]] = []
    width: Optional[int] = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue

        try:
            row = [float(tok) for tok in line.split()]
        except ValueError as e:
            raise MatrixParseError(source, line_no, f"无法解析数值: {e}")

        if not all(np.isfinite(row)):
            raise MatrixParseError(source, line_no, "包含非有限数值")

        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MatrixParseError(
                source, line_no, f"列数不一致: 期望 {width}，实际 {len(row)}"
            )
        rows.append(row)

    if not rows:
        raise MatrixParseError(source, None, "文件中没有矩阵数据")

    return np.array(rows, dtype=float)


def load_matrix(
    path: str,
    square: bool = False,
    shape: Optional[Sequence[int]] = None
) -> np.ndarray:
    """
    从文本文件加载矩阵

    Args:
        path: 文件路径
        square: 是否要求方阵
        shape: 期望形状，None 表示不检查

    Returns:
        二维 float 数组
    """
    if not os.path.exists(path):
        raise ConfigError(f"矩阵文件不存在: {path}")

    with open(path, 'r', encoding='utf-8') as f:
        matrix = parse_matrix_text(f.read(), source=path)

    if square and matrix.shape[0] != matrix.shape[1]:
        raise MatrixParseError(path, None, f"要求方阵，实际形状 {matrix.shape}")
    if shape is not None and tuple(matrix.shape) != tuple(shape):
        raise MatrixParseError(path, None, f"形状不符: 期望 {tuple(shape)}，实际 {matrix.shape}")

    return matrix


def as_matrix(value: Any, name: str, square: bool = False) -> np.ndarray:
    """
    将配置值（文件路径或嵌套列表）转换为矩阵

    Args:
        value: 文件路径字符串或嵌套列表
        name: 配置项名称
        square: 是否要求方阵

    Returns:
        二维 float 数组
    """
    if value is None:
        raise ConfigError(f"缺少矩阵配置: {name}")

    if isinstance(value, str):
        return load_matrix(value, square=square)

    try:
        matrix = np.atleast_2d(np.array(value, dtype=float))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"矩阵配置 {name} 格式错误: {e}")

    if matrix.ndim != 2:
        raise ConfigError(f"矩阵配置 {name} 必须是二维的")
    if square and matrix.shape[0] != matrix.shape[1]:
        raise ConfigError(f"矩阵配置 {name} 必须是方阵，实际形状 {matrix.shape}")

    return matrix


def expand_range(value: Any, name: str) -> List[Number]:
    """
    展开配置中的取值范围

    支持标量、列表、以及 {start, stop, step} 字典（stop 含端点）。

    Args:
        value: 配置值
        name: 配置项名称

    Returns:
        取值列表
    """
    if isinstance(value, dict):
        try:
            start = value['start']
            stop = value['stop']
        except KeyError as e:
            raise ConfigError(f"范围配置 {name} 缺少键 {e}")
        step = value.get('step', 1)
        if step == 0:
            raise ConfigError(f"范围配置 {name} 的 step 不能为 0")

        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        if count <= 0:
            raise ConfigError(f"范围配置 {name} 为空: {value}")

        points = [start + k * step for k in range(count)]
        if all(isinstance(v, int) for v in (start, stop, step)):
            return [int(p) for p in points]
        return [float(p) for p in points]

    if isinstance(value, (list, tuple)):
        if not value:
            raise ConfigError(f"范围配置 {name} 为空")
        return list(value)

    if value is None:
        raise ConfigError(f"缺少配置项: {name}")

    return [value]


def format_float(value: Optional[float], digits: int = 12) -> str:
    """
    按有效数字格式化浮点数（与区域设置无关）

    Args:
        value: 数值，None 输出空串
        digits: 有效数字位数

    Returns:
        格式化字符串
    """
    if value is None:
        return ''
    return format(float(value), f'.{digits}g')


def calculate_hash(arrays: Iterable[np.ndarray]) -> str:
    """
    计算一组数组的MD5哈希值，用于识别问题实例

    Args:
        arrays: 数组序列

    Returns:
        MD5哈希值
    """
    digest = hashlib.md5()
    for arr in arrays:
        arr = np.ascontiguousarray(arr, dtype=float)
        digest.update(str(arr.shape).encode('utf-8'))
        digest.update(arr.tobytes())
    return digest.hexdigest()


def ensure_dir(directory: str) -> None:
    """
    确保目录存在，不存在则创建

    Args:
        directory: 目录路径
    """
    if directory and not os.path.exists(directory):
        os.makedirs(directory, exist_ok=True)
