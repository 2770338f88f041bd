"""Evaluation of the orthonormal polynomial basis and its structure constants.

The basis is generated by the upward three-term recurrence

    x P_n(x) = a_{n+1} P_{n+1}(x) + a_n P_{n-1}(x),   P_0 = 1/a_0, P_{-1} = 0,

evaluated in double-word precision; downcasting to binary64 happens only at
output boundaries.  Also provided: the orthonormality (Gram) check against a
quadrature rule, the closed-form growth asymptote of the recurrence
coefficients, and the expansion coefficients of y^k P_n in the basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import extprec as xp
from .extprec import ExtendedReal, asextended
from .chebyshev import RecurrenceCoefficients
from .moments import QuadratureRule
from .weight import EvenPolynomialPotential

__all__ = [
    "BasisEvaluation",
    "eval_basis",
    "gram_check",
    "magnus_asymptote",
    "xk_expansion_coeffs",
    "monomial_coefficients",
    "eval_poly",
]


@dataclass(frozen=True)
class BasisEvaluation:
    """Values of P_0..P_N at a node set; rows[n] is a double-word vector."""

    rows: tuple
    nodes: ExtendedReal

    @property
    def degree(self) -> int:
        return len(self.rows) - 1

    def row(self, n: int) -> ExtendedReal:
        return self.rows[n]

    def to_float_matrix(self) -> np.ndarray:
        return np.vstack([np.asarray(r.hi) + np.asarray(r.lo) for r in self.rows])


def _as_nodes(nodes) -> ExtendedReal:
    if isinstance(nodes, ExtendedReal):
        return nodes
    return xp.promote(np.asarray(nodes, dtype=float))


def eval_basis(coeffs: RecurrenceCoefficients, N: int, nodes) -> BasisEvaluation:
    """Evaluate P_0..P_N at the given nodes by the upward recurrence."""
    coeffs.require(N + 1)
    x = _as_nodes(nodes)
    shape = np.asarray(x.hi).shape
    ones = xp.promote(np.ones(shape)) if shape else ExtendedReal(1.0)
    rows = [ones / coeffs.a[0]]
    if N >= 1:
        rows.append(x * rows[0] / coeffs.a[1])
    for n in range(1, N):
        rows.append((x * rows[n] - coeffs.a[n] * rows[n - 1]) / coeffs.a[n + 1])
    return BasisEvaluation(tuple(rows), x)


def gram_check(pot: EvenPolynomialPotential, coeffs: RecurrenceCoefficients,
               N: int, rule: QuadratureRule) -> float:
    """max_{i,j<=N} | integral(P_i P_j rho) - delta_ij | under the rule."""
    basis = eval_basis(coeffs, N, rule.nodes)
    wrho = rule.weights * pot.weight(rule.nodes)
    scaled = [basis.row(i) * wrho for i in range(N + 1)]
    worst = 0.0
    for i in range(N + 1):
        for j in range(i, N + 1):
            g = (scaled[i] * basis.row(j)).sum()
            dev = abs(float(g) - (1.0 if i == j else 0.0))
            if dev > worst:
                worst = dev
    return worst


def magnus_asymptote(pot: EvenPolynomialPotential, n: int) -> ExtendedReal:
    """Growth asymptote ((m-1)!^2 / (2 v_m (2m-1)!) * n)^(1/2m) for a_n."""
    if n < 1:
        raise ValueError("asymptote defined for n >= 1")
    m = pot.m
    num = xp.factorial(m - 1) * xp.factorial(m - 1) * n
    den = pot.v[m] * 2 * xp.factorial(2 * m - 1)
    return xp.nroot(num / den, 2 * m)


def xk_expansion_coeffs(coeffs: RecurrenceCoefficients, n: int, k: int):
    """Coefficients c_r with y^k P_n(y) = sum_r c_r P_{n+2r-k}(y), r = 0..k.

    Built by the recurrence

        c_{k+1, 0}   = c_{k, 0} a_{n-k}
        c_{k+1, k+1} = c_{k, k} a_{n+k+1}
        c_{k+1, r}   = c_{k, r-1} a_{n+2r-k-1} + a_{n+2r-k} c_{k, r}

    which keeps every coefficient a positive polynomial of the a's.
    Requires k <= n so no negative-index basis element is involved.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > n:
        raise ValueError(f"expansion needs k <= n, got k={k}, n={n}")
    coeffs.require(n + k + 1)
    a = coeffs.a
    cur = [ExtendedReal(1.0)]
    for kk in range(k):
        nxt = [cur[0] * a[n - kk]]
        for r in range(1, kk + 1):
            nxt.append(cur[r - 1] * a[n + 2 * r - kk - 1] + a[n + 2 * r - kk] * cur[r])
        nxt.append(cur[kk] * a[n + kk + 1])
        cur = nxt
    return cur


def monomial_coefficients(coeffs: RecurrenceCoefficients, N: int):
    """Standard-basis coefficients of P_0..P_N (list of double-word lists)."""
    coeffs.require(N + 1)
    zero = ExtendedReal(0.0)
    polys = [[ExtendedReal(1.0) / coeffs.a[0]]]
    if N >= 1:
        polys.append([zero, polys[0][0] / coeffs.a[1]])
    for n in range(1, N):
        prev, cur = polys[n - 1], polys[n]
        nxt = []
        for i in range(n + 2):
            term = cur[i - 1] if i >= 1 else zero
            if i < len(prev):
                term = term - coeffs.a[n] * prev[i]
            nxt.append(term / coeffs.a[n + 1])
        polys.append(nxt)
    return polys


def eval_poly(monomials: Sequence, x) -> ExtendedReal:
    """Horner evaluation of a double-word coefficient list at node(s) x."""
    x = _as_nodes(x)
    acc = asextended(monomials[-1])
    for c in reversed(monomials[:-1]):
        acc = acc * x + c
    return acc
