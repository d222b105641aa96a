from __future__ import annotations

import re
from fractions import Fraction

_RATIONAL = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_fraction(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; decimals are refused so values stay exact."""
    if not isinstance(text, str):
        raise ValueError(f"expected a 'p/q' string, got {text!r}")
    match = _RATIONAL.match(text)
    if match is None:
        raise ValueError(f"not a rational 'p/q' string: {text!r}")
    num, den = match.group(1), match.group(2)
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def format_fraction(value: Fraction | int) -> str:
    return str(Fraction(value))


def parse_vector(text: str) -> tuple[Fraction, ...]:
    return tuple(parse_fraction(part) for part in text.split(","))


def sig12(value: float) -> float:
    """Round a float summary to 12 significant digits for stable reports."""
    return float(format(float(value), ".12g"))
