"""Tests for the double-word arithmetic kernel."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expbasis import extprec as xp
from expbasis.extprec import ExtendedReal

finite_floats = st.floats(min_value=-1e120, max_value=1e120,
                          allow_nan=False, allow_infinity=False)
# Magnitude-bounded operands: products must stay in the normal binary64
# range for the error-free transforms to be exact.
_mag = st.floats(min_value=1e-120, max_value=1e15)
moderate_floats = st.builds(lambda m, s: m * s, _mag, st.sampled_from([-1.0, 1.0]))


def as_fraction(x: ExtendedReal) -> Fraction:
    return Fraction(float(x.hi)) + Fraction(float(x.lo))


def rel_err(x: ExtendedReal, exact: Fraction) -> float:
    if exact == 0:
        return abs(float(as_fraction(x)))
    return abs(float((as_fraction(x) - exact) / exact))


# -- error-free transforms ---------------------------------------------------

@given(finite_floats, finite_floats)
@settings(max_examples=300, deadline=None)
def test_two_sum_is_exact(a, b):
    s, e = xp.two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)


@given(moderate_floats, moderate_floats)
@settings(max_examples=300, deadline=None)
def test_two_prod_is_exact(a, b):
    p, e = xp.two_prod(a, b)
    assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)


# -- normalization and representation ----------------------------------------

@given(moderate_floats, moderate_floats)
@settings(max_examples=200, deadline=None)
def test_results_are_normalized(a, b):
    x = ExtendedReal(a) + ExtendedReal(b)
    assert x.hi + x.lo == x.hi  # round-to-nearest of the pair returns hi
    if x.hi != 0.0:
        assert abs(x.lo) <= 0.5 * math.ulp(x.hi)


def test_small_integer_arithmetic_is_exact():
    two = ExtendedReal(1) + ExtendedReal(1)
    assert (two.hi, two.lo) == (2.0, 0.0)
    four = two + two
    assert (four.hi, four.lo) == (4.0, 0.0)
    prod = ExtendedReal(3) * ExtendedReal(7)
    assert (prod.hi, prod.lo) == (21.0, 0.0)


def test_big_plus_one_keeps_trailing_word():
    x = ExtendedReal(1e16) + ExtendedReal(1)
    assert as_fraction(x) == Fraction(10**16) + 1
    assert x.lo == 1.0


@given(finite_floats)
@settings(max_examples=200, deadline=None)
def test_additive_identity(a):
    x = ExtendedReal(a) + ExtendedReal(0)
    assert x.hi == a and x.lo == 0.0


def test_int_conversion_exact_up_to_106_bits():
    for v in (2**105 - 1, 2**106 - 3, 10**30 + 7, -(2**100 + 12345)):
        assert as_fraction(ExtendedReal.from_int(v)) == v


# -- accuracy against an independent oracle ----------------------------------

def test_division_oracle():
    third = ExtendedReal(1) / ExtendedReal(3)
    assert rel_err(third, Fraction(1, 3)) <= 2.0 ** -98


@given(moderate_floats, moderate_floats)
@settings(max_examples=200, deadline=None)
def test_add_relative_error(a, b):
    exact = Fraction(a) + Fraction(b)
    x = ExtendedReal(a) + ExtendedReal(b)
    assert rel_err(x, exact) <= 2.0 ** -100


@given(moderate_floats, moderate_floats)
@settings(max_examples=200, deadline=None)
def test_mul_relative_error(a, b):
    exact = Fraction(a) * Fraction(b)
    x = ExtendedReal(a) * ExtendedReal(b)
    assert rel_err(x, exact) <= 2.0 ** -98


@given(moderate_floats, st.floats(min_value=1e-10, max_value=1e10))
@settings(max_examples=200, deadline=None)
def test_div_relative_error(a, b):
    exact = Fraction(a) / Fraction(b)
    x = ExtendedReal(a) / ExtendedReal(b)
    assert rel_err(x, exact) <= 2.0 ** -98


@given(st.floats(min_value=1e-100, max_value=1e100))
@settings(max_examples=200, deadline=None)
def test_sqrt_squares_back(a):
    r = xp.sqrt(ExtendedReal(a))
    assert rel_err(r * r, Fraction(a)) <= 2.0 ** -98


def test_sqrt_of_four_is_exact():
    r = xp.sqrt(ExtendedReal(4))
    assert (r.hi, r.lo) == (2.0, 0.0)


# -- algebraic identities ------------------------------------------------------

@given(moderate_floats, moderate_floats)
@settings(max_examples=200, deadline=None)
def test_add_then_subtract(a, b):
    x = (ExtendedReal(a) + ExtendedReal(b)) - ExtendedReal(b)
    scale = max(abs(a), abs(b), 1e-300)
    assert abs(float(x) - a) <= 2.0 ** -95 * scale


@given(st.floats(min_value=1e-120, max_value=1e120))
@settings(max_examples=200, deadline=None)
def test_mul_by_reciprocal(a):
    x = ExtendedReal(a) * (ExtendedReal(1) / ExtendedReal(a))
    assert abs(float(x) - 1.0) <= 2.0 ** -95


# -- exponential ---------------------------------------------------------------

def test_exp_at_zero_is_one():
    r = xp.exp(ExtendedReal(0))
    assert (r.hi, r.lo) == (1.0, 0.0)


def test_exp_one_matches_oracle_to_28_digits():
    # mpmath, 40 digits: e = 2.718281828459045235360287471352662497757
    e_ref = Fraction("2.718281828459045235360287471352662497757")
    r = xp.exp(ExtendedReal(1))
    assert rel_err(r, e_ref) <= 1e-28


def test_exp_large_negative_matches_oracle():
    # mpmath, 40 digits: exp(-450) = 3.693883068487256218793427524570747601336e-196
    ref = Fraction("3.693883068487256218793427524570747601336e-196")
    r = xp.exp(ExtendedReal(-450))
    assert rel_err(r, ref) <= 1e-28


def test_exp_out_of_range_raises():
    with pytest.raises(ValueError):
        xp.exp(ExtendedReal(-900))
    with pytest.raises(ValueError):
        xp.exp(ExtendedReal(751))


@given(st.floats(min_value=-740, max_value=740),
       st.floats(min_value=-740, max_value=740))
@settings(max_examples=200, deadline=None)
def test_exp_monotone(a, b):
    lo, hi = sorted((a, b))
    assert float(xp.exp(ExtendedReal(lo))) <= float(xp.exp(ExtendedReal(hi)))


@given(st.floats(min_value=-700, max_value=700))
@settings(max_examples=100, deadline=None)
def test_exp_times_exp_of_negative(a):
    prod = xp.exp(ExtendedReal(a)) * xp.exp(ExtendedReal(-a))
    assert abs(float(prod) - 1.0) <= 1e-28


# -- factorial -------------------------------------------------------------------

def test_factorial_values():
    assert float(xp.factorial(0)) == 1.0
    assert float(xp.factorial(5)) == 120.0
    assert as_fraction(xp.factorial(20)) == 2432902008176640000


def test_factorial_exact_while_representable():
    for n in (25, 30, 34):
        assert as_fraction(xp.factorial(n)) == math.factorial(n)


def test_factorial_rejects_out_of_range():
    with pytest.raises(ValueError):
        xp.factorial(-1)
    with pytest.raises(ValueError):
        xp.factorial(301)


# -- error signalling --------------------------------------------------------------

def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        ExtendedReal(1) / ExtendedReal(0)


def test_sqrt_of_negative_raises():
    with pytest.raises(ValueError):
        xp.sqrt(ExtendedReal(-1))


def test_overflow_propagates_infinity():
    x = ExtendedReal(1e308) * ExtendedReal(1e308)
    assert math.isinf(x.hi) and x.hi > 0
    y = x + ExtendedReal(1)
    assert math.isinf(y.hi)


def test_nan_propagates():
    x = ExtendedReal(math.nan) + ExtendedReal(1)
    assert math.isnan(x.hi)


# -- array values ---------------------------------------------------------------

def test_vector_ops_match_scalar_ops():
    vals = np.array([0.125, -3.5, 1e10, 7.0])
    v = xp.promote(vals)
    w = v * v + v
    for i, s in enumerate(vals):
        ref = ExtendedReal(float(s)) * ExtendedReal(float(s)) + ExtendedReal(float(s))
        assert w.hi[i] == ref.hi and w.lo[i] == ref.lo


def test_pairwise_sum_matches_exact_sum():
    rng = np.random.default_rng(42)
    vals = rng.uniform(-1.0, 1.0, size=1001)
    total = xp.promote(vals).sum()
    exact = sum(Fraction(float(t)) for t in vals)
    assert abs(float(as_fraction(total) - exact)) <= 1e-28


def test_where_selects_elementwise():
    a = xp.promote(np.array([1.0, 2.0, 3.0]))
    b = xp.promote(np.array([-1.0, -2.0, -3.0]))
    out = xp.where(np.array([True, False, True]), a, b)
    assert list(out.hi) == [1.0, -2.0, 3.0]


# -- misc utilities -----------------------------------------------------------------

def test_nroot_inverts_powers():
    x = ExtendedReal(7)
    y = xp.nroot(x ** 4, 4)
    assert rel_err(y, Fraction(7)) <= 2.0 ** -98


def test_from_str_round_trip():
    x = ExtendedReal.from_str("0.1")
    assert rel_err(x, Fraction(1, 10)) <= 2.0 ** -104


def test_comparisons_use_both_words():
    a = ExtendedReal(1e16) + ExtendedReal(1)
    b = ExtendedReal(1e16) + ExtendedReal(2)
    assert a < b and b > a and a != b and a <= b
    assert not a == b


def test_str_has_34_digit_precision():
    s = str(ExtendedReal(1) / ExtendedReal(3))
    digits = s.replace("0.", "")
    assert len(digits) >= 30
