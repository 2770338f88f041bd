"""First-order ODE satisfied by the basis: (d/dx + B_n) P_n = A_n P_{n-1}.

A_n is an even polynomial of degree 2m-2 and B_n an odd one of degree at most
2m-3 (empty in the quadratic case).  Their standard-basis coefficients are
assembled from the expansion coefficients of y^k P_n without any quadrature;
for the quartic double-well potential a closed form is also provided and must
agree with the general construction.  The module further exposes the
normalized residual check of the ODE, the F_n/G_n curves built from these
coefficients, and the detection of the index from which all A_n are positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import extprec as xp
from .extprec import ExtendedReal
from .chebyshev import RecurrenceCoefficients
from .orthopoly import eval_basis, eval_poly, monomial_coefficients, xk_expansion_coeffs, _as_nodes
from .weight import EvenPolynomialPotential

__all__ = [
    "OdeCoefficients",
    "build_ode_coeffs_general",
    "build_ode_coeffs_doublewell",
    "ode_residual",
    "fn_gn_curves",
    "detect_N0",
    "CurveTable",
]


@dataclass(frozen=True)
class OdeCoefficients:
    """Standard-basis coefficients, a_n factor included.

    A(x) = sum_l a_even[l] x^(2l)  (degree 2m-2, leading term 2 m v_m a_n),
    B(x) = sum_l b_odd[l] x^(2l+1) (degree <= 2m-3, empty when m = 1).
    """

    n: int
    a_even: tuple
    b_odd: tuple

    def eval_a(self, x) -> ExtendedReal:
        x = _as_nodes(x)
        t = x * x
        acc = self.a_even[-1]
        for c in reversed(self.a_even[:-1]):
            acc = acc * t + c
        return acc if np.asarray(x.hi).shape == () else acc * _ones_like(x)

    def eval_b(self, x) -> ExtendedReal:
        x = _as_nodes(x)
        if not self.b_odd:
            return xp.promote(np.zeros(np.asarray(x.hi).shape))
        t = x * x
        acc = self.b_odd[-1]
        for c in reversed(self.b_odd[:-1]):
            acc = acc * t + c
        return acc * x

    def eval_a_prime(self, x) -> ExtendedReal:
        """Derivative of the even polynomial A (an odd polynomial)."""
        x = _as_nodes(x)
        if len(self.a_even) == 1:
            return xp.promote(np.zeros(np.asarray(x.hi).shape))
        t = x * x
        acc = self.a_even[-1] * (2 * (len(self.a_even) - 1))
        for l in range(len(self.a_even) - 2, 0, -1):
            acc = acc * t + self.a_even[l] * (2 * l)
        return acc * x

    def min_value(self) -> float:
        """A(0); equals the global minimum once all coefficients are positive."""
        return float(self.a_even[0])

    def all_coefficients_positive(self) -> bool:
        return all(float(c) > 0.0 for c in self.a_even)


def _ones_like(x: ExtendedReal) -> ExtendedReal:
    return xp.promote(np.ones(np.asarray(x.hi).shape))


def build_ode_coeffs_general(pot: EvenPolynomialPotential,
                             coeffs: RecurrenceCoefficients, n: int) -> OdeCoefficients:
    """Assemble A_n, B_n from the y^k P_n expansion coefficients.

    Valid for n >= 2m - 2, where every needed expansion satisfies k <= n.
    """
    m = pot.m
    if n < 2 * m - 2:
        raise ValueError(f"general construction needs n >= 2m-2 = {2 * m - 2}")
    coeffs.require(n + max(2 * m - 2, 1) + 1)
    an = coeffs.a[n]
    # cache expansions per k; middle entries give the P_n and P_{n-1} components
    expansions = {}

    def c_of(k: int, r: int) -> ExtendedReal:
        if k == 0:
            return ExtendedReal(1.0)
        if k not in expansions:
            expansions[k] = xk_expansion_coeffs(coeffs, n, k)
        return expansions[k][r]

    a_even = []
    for l in range(m):
        acc = ExtendedReal(0.0)
        for p in range(l + 1, m + 1):
            acc = acc + pot.v[p] * (2 * p) * c_of(2 * p - 2 - 2 * l, p - 1 - l)
        a_even.append(an * acc)
    b_odd = []
    for l in range(m - 1):
        acc = ExtendedReal(0.0)
        for p in range(l + 2, m + 1):
            acc = acc + pot.v[p] * (2 * p) * c_of(2 * p - 2 * l - 3, p - l - 2)
        b_odd.append(an * acc)
    return OdeCoefficients(n, tuple(a_even), tuple(b_odd))


def build_ode_coeffs_doublewell(coeffs: RecurrenceCoefficients, n: int) -> OdeCoefficients:
    """Closed form for phi = (x^2-1)^2:

        A_n(x) = 4 a_n (x^2 + a_n^2 + a_{n+1}^2 - 1),   B_n(x) = 4 a_n^2 x.

    Valid for n >= 1; must agree with the general construction where both apply.
    """
    if n < 1:
        raise ValueError("closed form stated for n >= 1")
    coeffs.require(n + 2)
    an, an1 = coeffs.a[n], coeffs.a[n + 1]
    four_an = an * 4
    a0 = four_an * (an * an + an1 * an1 - 1)
    a1 = four_an
    b0 = an * an * 4
    return OdeCoefficients(n, (a0, a1), (b0,))


def ode_residual(pot: EvenPolynomialPotential, coeffs: RecurrenceCoefficients,
                 n: int, nodes) -> float:
    """max |P_n' + B_n P_n - A_n P_{n-1}| / max |A_n P_{n-1}| over the nodes.

    P_n' is differentiated exactly in coefficient space (monomial expansion
    from the recurrence), so the residual reflects coefficient consistency,
    not a finite-difference error.
    """
    if n < 1:
        raise ValueError("residual defined for n >= 1")
    ode = build_ode_coeffs_general(pot, coeffs, n)
    x = _as_nodes(nodes)
    basis = eval_basis(coeffs, n, x)
    mono = monomial_coefficients(coeffs, n)[n]
    dmono = [mono[i] * i for i in range(1, len(mono))]
    pn_prime = eval_poly(dmono, x)
    lhs = pn_prime + ode.eval_b(x) * basis.row(n)
    rhs = ode.eval_a(x) * basis.row(n - 1)
    resid = lhs - rhs
    scale = np.max(np.abs(np.asarray(rhs.hi) + np.asarray(rhs.lo)))
    worst = np.max(np.abs(np.asarray(resid.hi) + np.asarray(resid.lo)))
    return float(worst / scale)


@dataclass(frozen=True)
class CurveTable:
    """Per-node values of G_n = 1/A_n and F_n = (B_n A_n + phi' A_n + A_n')/A_n^2."""

    n: int
    x: np.ndarray
    f: np.ndarray
    g: np.ndarray
    asymptote: np.ndarray
    a_positive: bool


def fn_gn_curves(pot: EvenPolynomialPotential, coeffs: RecurrenceCoefficients,
                 n: int, nodes) -> CurveTable:
    """Tabulate F_n, G_n and the straight-line asymptote x / a_n.

    If A_n vanishes or turns negative on the nodes the table is still emitted
    (flagged), since that is precisely the pre-positivity regime worth seeing.
    """
    ode = build_ode_coeffs_general(pot, coeffs, n)
    x = _as_nodes(nodes)
    a_vals = ode.eval_a(x)
    a_hi = np.asarray(a_vals.hi) + np.asarray(a_vals.lo)
    positive = bool(np.all(a_hi > 0.0))
    b_vals = ode.eval_b(x)
    phip = pot.phi_prime(x)
    ap_vals = ode.eval_a_prime(x)
    num = (b_vals + phip) * a_vals + ap_vals
    xs = np.asarray(x.hi) + np.asarray(x.lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (np.asarray(num.hi) + np.asarray(num.lo)) / (a_hi * a_hi)
        g = 1.0 / a_hi
    asym = xs / float(coeffs.a[n])
    return CurveTable(n, xs, f, g, asym, positive)


def detect_N0(pot: EvenPolynomialPotential, coeffs: RecurrenceCoefficients,
              scan_upto: Optional[int] = None) -> Optional[int]:
    """Smallest scanned n from which every A_k (k >= n) has positive coefficients.

    The scan starts at n = 2m-2 (domain of the general construction) and ends
    at the last index the recurrence coefficients support.  Returns None when
    positivity has not set in by the end of the scanned range.
    """
    m = pot.m
    start = 2 * m - 2
    last = coeffs.valid_upto - max(2 * m - 2, 1) - 1
    if scan_upto is not None:
        last = min(last, scan_upto)
    if last < start:
        raise ValueError("not enough valid coefficients to scan")
    flags = [build_ode_coeffs_general(pot, coeffs, n).all_coefficients_positive()
             for n in range(start, last + 1)]
    if not flags[-1]:
        return None
    idx = len(flags) - 1
    while idx > 0 and flags[idx - 1]:
        idx -= 1
    return start + idx
