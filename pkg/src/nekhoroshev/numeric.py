"""Extended-range arithmetic shared by the constant and scale computations.

The stability constants span hundreds of decades (the threshold on the
perturbation size is ~1e-19 already for three degrees of freedom and
underflows binary64 for larger ones), so they are carried as 50-digit
mpmath floats. mpmath's exponent range is unbounded, so neither underflow
nor a log-space detour is needed. Exponents stay exact ``Fraction`` objects.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from mpmath.ctx_mp import MPContext

__all__ = ["MP", "Real", "mpf", "power", "to_float", "to_json_number", "snap_integer", "as_fraction"]

MP = MPContext()
MP.dps = 50

Real = type(MP.mpf(1))
SNAP_RTOL = MP.mpf(10) ** -40


def as_fraction(x) -> Fraction:
    """Exact rational value of ``x``; decimal strings of floats are honoured (1.1 -> 11/10)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(float(x))


def mpf(x) -> Real:
    if isinstance(x, Fraction):
        return MP.mpf(x.numerator) / x.denominator
    if isinstance(x, Real):
        return x
    return MP.mpf(x)


def power(base, exponent) -> Real:
    """``base ** exponent`` with an exact integer power whenever possible."""
    e = as_fraction(exponent)
    b = mpf(base)
    if e.denominator == 1:
        return b ** int(e)
    return b ** mpf(e)


def snap_integer(x: Real) -> Real:
    """Round ``x`` to the nearest integer if it is one up to working precision."""
    k = MP.nint(x)
    if k != 0 and abs(x - k) <= SNAP_RTOL * abs(k):
        return k
    return x


def to_float(x) -> float:
    """Nearest binary64 value (may be 0.0 or inf for out-of-range values)."""
    return float(mpf(x))


def to_json_number(x):
    """JSON-friendly form: int if integral, float if representable, else a string."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        x = mpf(x)
    if isinstance(x, (int, bool)):
        return x
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    x = mpf(x)
    if MP.isinf(x):
        return "inf" if x > 0 else "-inf"
    if MP.isint(x) and abs(x) < 2**53:
        return int(x)
    if x == 0 or 1e-300 < abs(x) < 1e300:
        return float(x)
    return MP.nstr(x, 17, min_fixed=1, max_fixed=0)
