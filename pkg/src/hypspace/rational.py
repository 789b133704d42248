"""Canonical text form for exact rationals.

All distances and thresholds in this package are ``fractions.Fraction``
values (exact, lowest terms, positive denominator).  The canonical text
form is ``"p/q"`` in lowest terms, or just ``"n"`` for integers:
``"3/2"``, ``"0"``, ``"7"``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import InputError

_RATIONAL_RE = re.compile(r"^(-?\d+)(?:/(\d+))$|^(-?\d+)$")


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or ``"n"`` into a Fraction; ints pass through."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise InputError(f"expected rational string, got {type(text).__name__}")
    m = _RATIONAL_RE.match(text.strip())
    if not m:
        raise InputError(f"malformed rational {text!r} (expected 'p/q' or 'n')")
    if m.group(3) is not None:
        return Fraction(int(m.group(3)))
    num, den = int(m.group(1)), int(m.group(2))
    if den == 0:
        raise InputError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(value: Fraction) -> str:
    """Canonical serialization: lowest terms, no '/1' suffix."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
