"""Moment-based construction of three-term recurrence coefficients.

Given moments mu_0..mu_{2n-1} of a symmetric positive measure, the algorithm
fills the auxiliary table

    sigma_{-1,l} = 0,  sigma_{0,l} = mu_l,
    sigma_{k,l} = sigma_{k-1,l+1} - beta_{k-1} sigma_{k-2,l},

and reads off beta_0 = mu_0, beta_k = sigma_{k,k} / sigma_{k-1,k-1}.  The map
from moments to betas is severely ill-conditioned, which is the whole reason
this package carries double-word arithmetic; breakdown (zero pivot or
nonpositive beta) is reported through valid_upto, never hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import extprec as xp
from .extprec import ExtendedReal
from .moments import MomentTable

__all__ = [
    "RecurrenceCoefficients",
    "chebyshev_betas",
    "beta_error_hermite",
    "hermite_reference",
]


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """beta_k = a_k^2 for the recurrence x P_n = a_{n+1} P_{n+1} + a_n P_{n-1}.

    Entries with index < valid_upto are trusted; diagnostic describes the
    first breakdown when valid_upto stopped short of the request.
    """

    beta: tuple
    a: tuple
    valid_upto: int
    diagnostic: Optional[str] = None

    def __len__(self):
        return len(self.beta)

    def require(self, n: int):
        """Fail loudly when fewer than n leading coefficients are valid."""
        if n > self.valid_upto:
            raise ValueError(
                f"only {self.valid_upto} recurrence coefficients are valid "
                f"({self.diagnostic or 'no diagnostic'}), need {n}")


def chebyshev_betas(moms: MomentTable, n: int, even_path: bool = False) -> RecurrenceCoefficients:
    """Run the moment algorithm for beta_0..beta_{n-1}.

    Needs moments up to index 2n-1.  With even_path=True the sigma updates
    skip the parity-forced zero columns of a symmetric measure; the nonzero
    arithmetic is identical, so results match the generic path bit for bit.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if len(moms) < 2 * n:
        raise ValueError(f"need moments up to index {2 * n - 1}, got {len(moms)}")
    width = 2 * n
    mu_hi = np.array([float(np.asarray(moms[k].hi)) for k in range(width)])
    mu_lo = np.array([float(np.asarray(moms[k].lo)) for k in range(width)])

    beta = [moms[0]]
    diag = None
    valid = n
    prev2 = (np.zeros(width), np.zeros(width))   # sigma_{-1}
    prev = (mu_hi, mu_lo)                        # sigma_0
    for k in range(1, n):
        bh, bl = beta[k - 1].hi, beta[k - 1].lo
        cur = (np.zeros(width), np.zeros(width))
        # nonzero sigma entries of a symmetric measure satisfy l = k (mod 2)
        lsel = slice(k, width - k, 2) if even_path else slice(k, width - k)
        shifted = slice(lsel.start + 1, lsel.stop + 1, lsel.step)
        ph, pl = xp._mul_core(prev2[0][lsel], prev2[1][lsel], bh, bl)
        ch, cl = xp._add_core(prev[0][shifted], prev[1][shifted], -ph, -pl)
        cur[0][lsel] = ch
        cur[1][lsel] = cl
        pivot = ExtendedReal._pair(float(prev[0][k - 1]), float(prev[1][k - 1]))
        if float(pivot) == 0.0:
            valid, diag = k, f"zero pivot sigma_{k - 1},{k - 1}"
            break
        bk = ExtendedReal._pair(float(cur[0][k]), float(cur[1][k])) / pivot
        if not (float(bk) > 0.0 and math.isfinite(float(bk))):
            valid, diag = k, f"nonpositive beta_{k} = {float(bk):.6g}"
            break
        beta.append(bk)
        prev2, prev = prev, cur
    a = tuple(xp.sqrt(b) if float(b) >= 0.0 else ExtendedReal(math.nan) for b in beta)
    return RecurrenceCoefficients(tuple(beta), a, valid, diag)


def beta_error_hermite(coeffs: RecurrenceCoefficients) -> ExtendedReal:
    """max over computed k of |beta_k - k|, with |beta_0 - 1| folded in.

    Only meaningful for coefficients computed from a Gaussian moment table,
    where the exact values are beta_0 = 1, beta_k = k.
    """
    worst = abs(coeffs.beta[0] - 1)
    for k in range(1, min(len(coeffs.beta), coeffs.valid_upto)):
        err = abs(coeffs.beta[k] - k)
        if float(err) > float(worst):
            worst = err
    return worst


def hermite_reference(count: int) -> RecurrenceCoefficients:
    """Exact Gaussian-weight coefficients: beta_0 = 1, beta_k = k, a_k = sqrt(k)."""
    beta = [ExtendedReal(1)] + [ExtendedReal(k) for k in range(1, count)]
    a = [ExtendedReal(1)] + [xp.sqrt(ExtendedReal(k)) for k in range(1, count)]
    return RecurrenceCoefficients(tuple(beta), tuple(a), count)
