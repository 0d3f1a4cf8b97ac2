"""
异常定义

所有异常都带有 exit_code，主程序据此决定进程退出码:
0 成功，1 运行/数值错误，2 配置或输入错误
"""

from typing import Optional


class PartialDetectError(Exception):
    """系统异常基类"""

    exit_code = 1


class ConfigError(PartialDetectError):
    """配置错误（配置文件缺失、取值非法、扫描点不可行等）"""

    exit_code = 2


class MatrixParseError(ConfigError):
    """矩阵文本文件解析错误"""

    def __init__(self, path: str, line_no: Optional[int], message: str):
        self.path = path
        self.line_no = line_no      # None 表示整个文件的错误（空文件、形状不符）
        location = path if line_no is None else f"{path}:{line_no}"
        super().__init__(f"{location}: {message}")


class ArgumentError(PartialDetectError, ValueError):
    """参数不满足前置条件"""

    exit_code = 2


class RankDeficiencyError(ArgumentError):
    """变换矩阵 T 不满秩"""

    def __init__(self, message: str, ratio: Optional[float] = None):
        self.ratio = ratio
        super().__init__(message)


class NotPositiveDefiniteError(ArgumentError):
    """矩阵不是正定矩阵"""

    def __init__(
        self,
        message: str,
        pivot: Optional[int] = None,
        smallest_eigenvalue: Optional[float] = None
    ):
        self.pivot = pivot
        self.smallest_eigenvalue = smallest_eigenvalue
        super().__init__(message)


class ConvergenceError(PartialDetectError):
    """迭代算法在上限内未收敛"""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (残差范数: {residual:.3e})")


class ConsistencyError(PartialDetectError):
    """内部一致性校验失败，正常输入下不应出现"""
