"""Exact rational scalars and 2D points.

gmpy2's ``mpq`` is used when importable (roughly ten times faster than
``fractions.Fraction``); otherwise we fall back to the standard library.
Points are plain ``(x, y)`` tuples of rationals.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Tuple, Union

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _mpq

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover
    _mpq = Fraction
    HAVE_GMPY2 = False

Rational = Union["_mpq", Fraction]
Point = Tuple[Rational, Rational]

_NUM_RE = re.compile(r"^[+-]?\d+(/[+-]?\d+)?$")


def Q(value, den=None) -> Rational:
    """Coerce ``value`` (int, Fraction, mpq or ``"p/q"`` string) to an exact rational."""
    if den is not None:
        return _mpq(int(value), int(den))
    if isinstance(value, float):
        # floats are exact binary fractions; keep them exact
        return _mpq(Fraction(value))
    if isinstance(value, str):
        value = value.strip()
        if not _NUM_RE.match(value):
            raise ValueError(f"not an exact rational: {value!r}")
        if "/" in value:
            n, d = value.split("/")
            if int(d) == 0:
                raise ValueError(f"zero denominator in {value!r}")
            return _mpq(int(n), int(d))
        return _mpq(int(value))
    if isinstance(value, Fraction):
        return _mpq(value.numerator, value.denominator)
    return _mpq(value)


def P(x, y) -> Point:
    """Build an exact point from two rational-like values."""
    return (Q(x), Q(y))


def fmt(value: Rational) -> str:
    """Format as ``num/den`` (always with an explicit denominator)."""
    v = Q(value)
    return f"{int(v.numerator)}/{int(v.denominator)}"


def fmt_point(p: Point) -> str:
    return f"{fmt(p[0])} {fmt(p[1])}"


def parse_point(text: str) -> Point:
    parts = text.split()
    if len(parts) != 2:
        raise ValueError(f"expected two coordinates, got {len(parts)}")
    return (Q(parts[0]), Q(parts[1]))


def to_float(p: Point) -> Tuple[float, float]:
    return (float(p[0]), float(p[1]))


def bit_length(p: Point) -> int:
    """Largest numerator/denominator bit length among the coordinates."""
    return max(
        max(int(abs(c.numerator)).bit_length(), int(c.denominator).bit_length()) for c in p
    )
