"""
精确有理数工具

所有时间、时长、时钟值都使用 Fraction，序列化为 "p/q" 或整数字符串。
"""

from fractions import Fraction
from typing import Union

Rational = Union[int, str, Fraction]


def parse_rational(value: Rational) -> Fraction:
    """
    解析有理数

    Args:
        value: "p/q"、整数字符串、十进制字符串（如 "0.500"）、int 或 Fraction

    Returns:
        Fraction 实例

    Raises:
        ValueError: 无法解析，或传入 float（浮点数不精确，拒绝）
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"不接受浮点数或布尔值作为有理数: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    text = str(value).strip()
    if not text:
        raise ValueError("空字符串不是有理数")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"无效的有理数 '{text}': {e}") from e


def format_rational(value: Fraction) -> str:
    """格式化为 "p/q"，分母为 1 时只输出整数"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
