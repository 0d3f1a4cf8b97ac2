"""
报告生成器

负责把实验结果写成 CSV 表格，以及渲染单实例检查的文本报告
"""

import csv
import io
import os
from typing import Any, Dict, Optional, Sequence, Union

from jinja2 import Template

from ..models.results import InspectReport, SweepRow, TransformRow
from ..utils.errors import PartialDetectError
from ..utils.helpers import ensure_dir, format_float
from ..utils.logger import get_logger

# 各实验类型的固定表头
SWEEP_TAIL = ['j_opt', 'bound_opt', 'bound_best_random', 'p_hat', 'std_err']
CSV_HEADERS = {
    'random-vs-opt': ['index', 'label', 'j_value', 'bound', 'reciprocal_bound', 'ratio_to_optimal'],
    'sweep-snr': ['snr_db'] + SWEEP_TAIL,
    'sweep-m': ['m'] + SWEEP_TAIL,
    'sweep-n': ['n'] + SWEEP_TAIL,
}

Row = Union[SweepRow, TransformRow]


class ReportGenerator:
    """报告生成器类"""

    def __init__(self, float_digits: int = 12):
        """
        初始化报告生成器

        Args:
            float_digits: 浮点数有效数字位数
        """
        self.float_digits = float_digits
        self.logger = get_logger('report')

        # 模板路径
        self.template_path = os.path.join(
            os.path.dirname(__file__),
            'templates',
            'inspect.txt'
        )

    def _cell(self, value: Any) -> str:
        """格式化单元格：None 为空，整数原样，浮点按有效数字"""
        if value is None:
            return ''
        if isinstance(value, str):
            return value
        if isinstance(value, (bool, int)):
            return str(int(value))
        return format_float(value, self.float_digits)

    def render_csv(self, kind: str, rows: Sequence[Row]) -> str:
        """
        把结果行渲染为 CSV 文本

        Args:
            kind: 实验类型
            rows: 结果行

        Returns:
            CSV 字符串
        """
        if kind not in CSV_HEADERS:
            raise PartialDetectError(f"没有为 {kind} 定义 CSV 表头")

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(CSV_HEADERS[kind])
        for row in rows:
            writer.writerow([self._cell(v) for v in row.values()])
        return buffer.getvalue()

    def write_csv(self, kind: str, rows: Sequence[Row], output_path: str) -> str:
        """
        写出 CSV 文件

        Args:
            kind: 实验类型
            rows: 结果行
            output_path: 输出路径

        Returns:
            输出路径
        """
        text = self.render_csv(kind, rows)
        self._save(text, output_path)
        self.logger.info(f"结果已保存: {output_path}（{len(rows)} 行）")
        return output_path

    def _prepare_context(self, report: InspectReport) -> Dict[str, Any]:
        """准备模板上下文数据"""
        fmt = self._cell
        return {
            'n': report.n,
            'm': report.m,
            'rank_ratio': fmt(report.rank_ratio),
            'spectrum': [fmt(v) for v in report.cond_cov_spectrum],
            'j_value': fmt(report.j_value),
            'expected_chernoff': fmt(report.expected_chernoff),
            'optimal_product': fmt(report.optimal_product),
            'optimal_j': fmt(report.optimal_j),
            'optimal_bound': fmt(report.optimal_bound),
            'gap': fmt(report.gap),
        }

    def render_inspect(self, report: InspectReport) -> str:
        """
        渲染单实例检查报告

        Args:
            report: 检查结果

        Returns:
            报告文本
        """
        context = self._prepare_context(report)
        try:
            with open(self.template_path, 'r', encoding='utf-8') as f:
                template_str = f.read()

            template = Template(template_str, keep_trailing_newline=True)
            return template.render(**context)

        except FileNotFoundError:
            self.logger.error(f"模板文件不存在: {self.template_path}")
            return self._get_fallback_template(context)
        except Exception as e:
            self.logger.error(f"渲染模板失败: {e}")
            return self._get_fallback_template(context)

    def _get_fallback_template(self, context: Dict[str, Any]) -> str:
        """获取备用模板"""
        lines = [
            f"n = {context['n']}",
            f"m = {context['m']}",
            f"rank_ratio = {context['rank_ratio']}",
            f"cond_cov_spectrum = {' '.join(context['spectrum'])}",
            f"j_value = {context['j_value']}",
            f"expected_chernoff = {context['expected_chernoff']}",
            f"optimal_product = {context['optimal_product']}",
            f"optimal_j = {context['optimal_j']}",
            f"optimal_bound = {context['optimal_bound']}",
            f"gap = {context['gap']}",
        ]
        return '\n'.join(lines) + '\n'

    def write_inspect(self, report: InspectReport, output_path: Optional[str] = None) -> str:
        """
        渲染检查报告，指定路径时同时写出文件

        Returns:
            报告文本
        """
        text = self.render_inspect(report)
        if output_path:
            self._save(text, output_path)
            self.logger.info(f"检查报告已保存: {output_path}")
        return text

    def _save(self, text: str, output_path: str) -> None:
        """保存文本文件"""
        try:
            ensure_dir(os.path.dirname(output_path))
            with open(output_path, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
        except OSError as e:
            self.logger.error(f"保存文件失败: {output_path}: {e}")
            raise PartialDetectError(f"无法写入 {output_path}: {e}") from e
