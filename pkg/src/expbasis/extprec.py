"""Double-word extended precision arithmetic.

An ``ExtendedReal`` stores a value as an unevaluated sum ``hi + lo`` of two
native binary64 words, normalized so that ``|lo| <= 0.5 ulp(hi)``.  This gives
a significand of roughly 106 bits (about 31 decimal digits), which is what the
ill-conditioned moment computations in this package need.  All kernels are
written against plain arithmetic operators so they work elementwise on numpy
arrays as well as on scalars; the heavy quadrature loops rely on that.

The error-free transforms (``two_sum``, ``two_prod``) assume IEEE-754
round-to-nearest and no intermediate overflow; operands are expected to stay
below ``2**996`` in magnitude, which every computation here respects.
"""

from __future__ import annotations

import decimal
import math
from fractions import Fraction

import numpy as np

__all__ = [
    "ExtendedReal",
    "two_sum",
    "two_prod",
    "asextended",
    "promote",
    "where",
    "sqrt",
    "exp",
    "nroot",
    "factorial",
    "ldexp",
    "dot",
    "EPS",
    "LN2",
]

# Relative rounding unit of the double-word format.
EPS = 2.0 ** -105

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    """Error-free sum: returns (s, e) with s + e == a + b exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _quick_two_sum(a, b):
    """two_sum specialization valid when |a| >= |b|."""
    s = a + b
    e = b - (s - a)
    return s, e


def _split(a):
    c = _SPLITTER * a
    big = c - a
    hi = c - big
    return hi, a - hi


def two_prod(a, b):
    """Error-free product: returns (p, e) with p + e == a * b exactly."""
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


def _patch_nonfinite(hi, lo, raw):
    """Replace non-finite results by the naive native value (inf/nan policy)."""
    if hi.__class__ is float:
        if math.isfinite(hi):
            return hi, lo
        return raw, 0.0
    bad = ~np.isfinite(hi)
    if np.any(bad):
        hi = np.where(bad, raw, hi)
        lo = np.where(bad, 0.0, lo)
    return hi, lo


def _add_core(ahi, alo, bhi, blo):
    s, e = two_sum(ahi, bhi)
    t, f = two_sum(alo, blo)
    e = e + t
    s, e = _quick_two_sum(s, e)
    e = e + f
    hi, lo = _quick_two_sum(s, e)
    return _patch_nonfinite(hi, lo, ahi + bhi)


def _mul_core(ahi, alo, bhi, blo):
    p, e = two_prod(ahi, bhi)
    e = e + (ahi * blo + alo * bhi)
    hi, lo = _quick_two_sum(p, e)
    return _patch_nonfinite(hi, lo, ahi * bhi)


class ExtendedReal:
    """Immutable double-word real number (scalar or elementwise array)."""

    __slots__ = ("hi", "lo")

    def __init__(self, value=0.0, lo=None):
        if lo is not None:
            hi, lo_ = two_sum(value, lo)
            object.__setattr__(self, "hi", hi)
            object.__setattr__(self, "lo", lo_)
            return
        if isinstance(value, ExtendedReal):
            hi, lo_ = value.hi, value.lo
        elif isinstance(value, float):
            hi, lo_ = value, 0.0
        elif isinstance(value, int):
            other = ExtendedReal.from_int(value)
            hi, lo_ = other.hi, other.lo
        elif isinstance(value, str):
            other = ExtendedReal.from_str(value)
            hi, lo_ = other.hi, other.lo
        elif isinstance(value, np.ndarray):
            hi, lo_ = np.asarray(value, dtype=float), np.zeros(value.shape)
        else:
            hi, lo_ = float(value), 0.0
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo", lo_)

    def __setattr__(self, name, value):
        raise AttributeError("ExtendedReal is immutable")

    @classmethod
    def _pair(cls, hi, lo):
        """Internal constructor for already-normalized (hi, lo) pairs."""
        self = object.__new__(cls)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo", lo)
        return self

    @classmethod
    def from_int(cls, value: int) -> "ExtendedReal":
        try:
            hi = float(value)
        except OverflowError:
            return cls._pair(math.inf if value > 0 else -math.inf, 0.0)
        if math.isinf(hi):
            return cls._pair(hi, 0.0)
        rest = value - int(hi)
        return cls._pair(hi, float(rest))

    @classmethod
    def from_fraction(cls, value: Fraction) -> "ExtendedReal":
        hi = float(value)
        if not math.isfinite(hi):
            return cls._pair(hi, 0.0)
        lo = float(value - Fraction(hi))
        return cls._pair(hi, lo)

    @classmethod
    def from_str(cls, text: str) -> "ExtendedReal":
        return cls.from_fraction(Fraction(text.strip()))

    # -- conversions ----------------------------------------------------

    def to_float(self):
        return self.hi + self.lo

    def __float__(self):
        return float(self.hi + self.lo)

    def to_decimal(self, digits: int = 34) -> decimal.Decimal:
        with decimal.localcontext() as ctx:
            ctx.prec = digits
            return decimal.Decimal(float(self.hi)) + decimal.Decimal(float(self.lo))

    def __str__(self):
        if isinstance(self.hi, np.ndarray):
            return f"ExtendedReal(array shape={self.hi.shape})"
        return str(self.to_decimal())

    def __repr__(self):
        if isinstance(self.hi, np.ndarray):
            return f"ExtendedReal(array shape={self.hi.shape})"
        return f"ExtendedReal('{self.to_decimal()}')"

    # -- array conveniences ----------------------------------------------

    @property
    def size(self):
        return self.hi.size if isinstance(self.hi, np.ndarray) else 1

    def __getitem__(self, idx):
        return ExtendedReal._pair(self.hi[idx], np.asarray(self.lo)[idx])

    def sum(self) -> "ExtendedReal":
        """Pairwise-tree sum over a 1-D array value (double-word accurate)."""
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), hi.shape).copy()
        while hi.size > 1:
            if hi.size % 2:
                hi = np.append(hi, 0.0)
                lo = np.append(lo, 0.0)
            half = hi.size // 2
            hi, lo = _add_core(hi[:half], lo[:half], hi[half:], lo[half:])
        return ExtendedReal._pair(float(hi[0]), float(lo[0]))

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        o = asextended(other)
        return ExtendedReal._pair(*_add_core(self.hi, self.lo, o.hi, o.lo))

    __radd__ = __add__

    def __neg__(self):
        return ExtendedReal._pair(-self.hi, -self.lo)

    def __sub__(self, other):
        o = asextended(other)
        return ExtendedReal._pair(*_add_core(self.hi, self.lo, -o.hi, -o.lo))

    def __rsub__(self, other):
        return asextended(other).__sub__(self)

    def __mul__(self, other):
        o = asextended(other)
        return ExtendedReal._pair(*_mul_core(self.hi, self.lo, o.hi, o.lo))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = asextended(other)
        if np.any(np.asarray(o.hi) == 0.0):
            raise ZeroDivisionError("division by zero in extended precision")
        q1 = self.hi / o.hi
        r = self - o * ExtendedReal._pair(q1, 0.0 * q1)
        q2 = r.hi / o.hi
        r = r - o * ExtendedReal._pair(q2, 0.0 * q2)
        q3 = r.hi / o.hi
        hi, lo = _quick_two_sum(q1, q2)
        hi, lo = _add_core(hi, lo, q3, 0.0 * q3)
        return ExtendedReal._pair(*_patch_nonfinite(hi, lo, q1))

    def __rtruediv__(self, other):
        return asextended(other).__truediv__(self)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = ExtendedReal._pair(np.ones_like(np.asarray(self.hi, float)) if isinstance(self.hi, np.ndarray) else 1.0,
                                    np.zeros_like(np.asarray(self.hi, float)) if isinstance(self.hi, np.ndarray) else 0.0)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def __abs__(self):
        neg = np.asarray(self.hi) < 0
        if neg.ndim == 0:
            return -self if neg else self
        return ExtendedReal._pair(np.where(neg, -self.hi, self.hi),
                                  np.where(neg, -self.lo, self.lo))

    # -- comparisons (defined for normalized pairs) ------------------------

    def __eq__(self, other):
        o = asextended(other)
        return (self.hi == o.hi) & (self.lo == o.lo)

    def __ne__(self, other):
        return ~np.asarray(self.__eq__(other)) if isinstance(self.hi, np.ndarray) else not self.__eq__(other)

    def __lt__(self, other):
        o = asextended(other)
        return (self.hi < o.hi) | ((self.hi == o.hi) & (self.lo < o.lo))

    def __le__(self, other):
        o = asextended(other)
        return (self.hi < o.hi) | ((self.hi == o.hi) & (self.lo <= o.lo))

    def __gt__(self, other):
        return asextended(other).__lt__(self)

    def __ge__(self, other):
        return asextended(other).__le__(self)

    def __hash__(self):
        return hash((float(self.hi), float(self.lo)))


def asextended(value) -> ExtendedReal:
    if isinstance(value, ExtendedReal):
        return value
    return ExtendedReal(value)


def promote(values) -> ExtendedReal:
    """Promote a float array (or scalar) to an exact ExtendedReal."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return ExtendedReal._pair(float(arr), 0.0)
    return ExtendedReal._pair(arr, np.zeros_like(arr))


def where(mask, a, b) -> ExtendedReal:
    """Elementwise select between two ExtendedReal values."""
    a = asextended(a)
    b = asextended(b)
    return ExtendedReal._pair(np.where(mask, a.hi, b.hi), np.where(mask, a.lo, b.lo))


def ldexp(x: ExtendedReal, e) -> ExtendedReal:
    """Exact scaling by 2**e (elementwise)."""
    ei = np.asarray(e, dtype=np.int64)
    return ExtendedReal._pair(np.ldexp(x.hi, ei), np.ldexp(x.lo, ei))


def sqrt(x) -> ExtendedReal:
    """Square root, accurate to a few units in the last double-word place."""
    x = asextended(x)
    hi = np.asarray(x.hi, dtype=float)
    if np.any(hi < 0.0):
        raise ValueError("sqrt of a negative value")
    zero = hi == 0.0
    safe = np.where(zero, 1.0, hi)
    inv = 1.0 / np.sqrt(safe)
    y = safe * inv
    # One Newton correction computed in double-word arithmetic.
    y2 = ExtendedReal._pair(*two_prod(y, y))
    diff = x - y2
    corr = diff.hi * (inv * 0.5)
    rhi, rlo = _quick_two_sum(y, corr)
    rhi = np.where(zero, 0.0, rhi)
    rlo = np.where(zero, 0.0, rlo)
    if rhi.ndim == 0:
        return ExtendedReal._pair(float(rhi), float(rlo))
    return ExtendedReal._pair(rhi, rlo)


def nroot(x, p: int) -> ExtendedReal:
    """p-th root of a positive value via Newton iteration."""
    x = asextended(x)
    if p <= 0:
        raise ValueError("root order must be positive")
    if np.any(np.asarray(x.hi) <= 0.0):
        raise ValueError("nroot requires a positive argument")
    y = asextended(float(np.asarray(x.hi)) ** (1.0 / p)) if np.asarray(x.hi).ndim == 0 \
        else promote(np.asarray(x.hi) ** (1.0 / p))
    pe = ExtendedReal(p)
    for _ in range(3):
        yp1 = y ** (p - 1)
        y = y - (yp1 * y - x) / (pe * yp1)
    return y


# Exact ln2 pieces for Cody-Waite argument reduction: L1 and L2 carry 41
# significant bits each so k*L1 and k*L2 are exact for |k| < 2**11.
_LN2_FRACTION = Fraction(
    "0.6931471805599453094172321214581765680755001343602552541206800095"
)
_EXP_L1 = float(Fraction(round(_LN2_FRACTION * 2**41), 2**41))
_EXP_L2 = float(Fraction(round((_LN2_FRACTION - Fraction(_EXP_L1)) * 2**82), 2**82))
_EXP_L3 = float(_LN2_FRACTION - Fraction(_EXP_L1) - Fraction(_EXP_L2))
LN2 = ExtendedReal.from_fraction(_LN2_FRACTION)
_LN2_FLOAT = float(LN2.hi)

_INV_FACT = [ExtendedReal.from_fraction(Fraction(1, math.factorial(j))) for j in range(13)]

EXP_MAX_ARG = 750.0


def exp(x) -> ExtendedReal:
    """Exponential with argument reduction by ln 2 and a scaled Taylor kernel.

    Arguments must lie in [-750, 750]; anything larger raises, since the
    result would overflow or lose the trailing word to the subnormal range.
    """
    x = asextended(x)
    hi = np.asarray(x.hi, dtype=float)
    if np.any(np.abs(hi) > EXP_MAX_ARG) or np.any(~np.isfinite(hi)):
        raise ValueError(f"exp argument outside [-{EXP_MAX_ARG:.0f}, {EXP_MAX_ARG:.0f}]")
    k = np.rint(hi / _LN2_FLOAT)
    # r = x - k*ln2, with k*L1 and k*L2 exact products.
    t1 = hi - k * _EXP_L1
    r = ExtendedReal._pair(*two_sum(t1, np.asarray(x.lo, dtype=float)))
    r = r - ExtendedReal._pair(k * _EXP_L2, 0.0 * k)
    r = r - ExtendedReal._pair(*two_prod(k, _EXP_L3))
    # Scale down by 2**9, run the Taylor series for expm1, square back up.
    r = ExtendedReal._pair(r.hi * 0.001953125, r.lo * 0.001953125)
    p = _INV_FACT[11]
    for j in range(10, 1, -1):
        p = p * r + _INV_FACT[j]
    p = p * r + 1.0
    p = p * r
    for _ in range(9):
        p = p * (p + 2.0)
    res = p + 1.0
    ki = k.astype(np.int64) if isinstance(k, np.ndarray) else int(k)
    # Scaling may overflow to inf (arguments above ~709.8) or fall into the
    # subnormal range (below ~-708); both follow the native error model.
    with np.errstate(over="ignore", under="ignore"):
        rhi = np.ldexp(res.hi, ki)
        rlo = np.ldexp(res.lo, ki)
    rhi, rlo = _patch_nonfinite(rhi, rlo, rhi) if isinstance(rhi, np.ndarray) \
        else ((float(rhi), float(rlo)) if math.isfinite(float(rhi)) else (float(rhi), 0.0))
    if np.asarray(rhi).ndim == 0:
        return ExtendedReal._pair(float(rhi), float(rlo))
    return ExtendedReal._pair(rhi, rlo)


def factorial(n: int) -> ExtendedReal:
    """n! as an ExtendedReal; exact whenever it fits in the format."""
    if not isinstance(n, int) or n < 0:
        raise ValueError("factorial requires a nonnegative integer")
    if n > 300:
        raise ValueError("factorial supported up to n = 300")
    return ExtendedReal.from_int(math.factorial(n))


def dot(a: ExtendedReal, b: ExtendedReal) -> ExtendedReal:
    """Inner product of two array values with a pairwise double-word sum."""
    return (a * b).sum()
