"""
标准 Q 函数

Q(x) = P(N(0,1) > x)，由互补误差函数计算
"""

import numpy as np
from scipy.special import erfc, log_ndtr


def q_function(x):
    """
    标准 Q 函数 Q(x) = erfc(x / √2) / 2

    远尾部（x 大于约 38）在 float64 下下溢为 0.0，需要尾部数值时用 log_q_function。

    Args:
        x: 实数或数组

    Returns:
        概率值
    """
    result = 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))
    if np.ndim(result) == 0:
        return float(result)
    return result


def log_q_function(x):
    """ln Q(x)，尾部不下溢"""
    result = log_ndtr(-np.asarray(x, dtype=float))
    if np.ndim(result) == 0:
        return float(result)
    return result


def chernoff_q_bound(x):
    """Q 函数的 Chernoff 上界 ½·exp(-x²/2)，x ≥ 0 时成立"""
    result = 0.5 * np.exp(-0.5 * np.square(np.asarray(x, dtype=float)))
    if np.ndim(result) == 0:
        return float(result)
    return result
