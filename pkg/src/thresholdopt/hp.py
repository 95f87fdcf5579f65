"""High-precision float session helpers on top of gmpy2 (MPFR).

All floating computation in the package runs through the thread-local gmpy2
context, so a ``with precision(bits):`` block fixes the working precision for
everything it encloses.
"""

from __future__ import annotations

import contextlib
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

DEFAULT_PRECISION_BITS = 100
MAX_PRECISION_BITS = 400


def get_precision() -> int:
    return gmpy2.get_context().precision


def set_precision(bits: int) -> None:
    gmpy2.get_context().precision = int(bits)


@contextlib.contextmanager
def precision(bits: int):
    """Run the enclosed block at ``bits`` of MPFR precision (thread-local)."""
    ctx = gmpy2.get_context()
    old = ctx.precision
    ctx.precision = int(bits)
    try:
        yield
    finally:
        ctx.precision = old


def from_fraction(q: Fraction) -> mpfr:
    """Round an exact rational to the current working precision."""
    return mpfr(gmpy2.mpq(q.numerator, q.denominator))


def to_fraction(x) -> Fraction:
    """Exact rational value of a binary float (mpfr values are dyadic)."""
    q = gmpy2.mpq(x)
    return Fraction(int(q.numerator), int(q.denominator))


def decimal_str(x, digits: int | None = None) -> str:
    """Decimal rendering of ``x``; defaults to the full working precision."""
    if digits is None:
        digits = int(get_precision() * 0.30103) + 2
    return format(mpfr(x), f".{max(1, int(digits))}g")


def truncate_decimals(x, decimals: int) -> str:
    """Truncate (never round) ``x`` at ``decimals`` fractional digits."""
    decimals = max(0, int(decimals))
    q = gmpy2.mpq(mpfr(x))
    scale = 10 ** decimals
    n = (q.numerator * scale) // q.denominator  # floor; x >= 0 in practice
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, scale)
    if decimals == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{decimals}d}"
