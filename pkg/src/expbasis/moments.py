"""Moments of exponential weights: quadrature, forward recursion, closed forms.

The moment table mu_k = integral of x^k rho(x) dx feeds the moment-based
recurrence-coefficient algorithm, which is notoriously ill-conditioned, so
everything here runs in double-word arithmetic.  Two independent routes are
provided: a brute-force composite quadrature and a forward recursion that
needs only the first few even moments as seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import extprec as xp
from .extprec import ExtendedReal, asextended
from .weight import EvenPolynomialPotential

__all__ = [
    "QuadratureRule",
    "MomentTable",
    "integrate",
    "moments_quadrature",
    "moments_recursion",
    "recursion_seeds",
    "hermite_moments_closed_form",
    "first_disagreement",
    "METHOD_QUADRATURE",
    "METHOD_RECURSION",
    "METHOD_CLOSED_FORM",
]

METHOD_QUADRATURE = "quadrature"
METHOD_RECURSION = "recursion"
METHOD_CLOSED_FORM = "closed-form-hermite"

_WEDDLE_PATTERN = (1, 5, 1, 6, 1, 5, 1)        # times 3h/10
_NEWTON_COTES_PATTERN = (41, 216, 27, 272, 27, 216, 41)  # times h/140


class QuadratureRule:
    """Composite 7-point rule on [-L, L] with P panels (6P + 1 nodes).

    The default variant is the classical Weddle rule with panel weights
    (3h/10)(1,5,1,6,1,5,1); the exact 7-point Newton-Cotes weights
    (h/140)(41,216,27,272,27,216,41) are available as variant="newtoncotes"
    for comparison.  Nodes are built symmetric around an exact zero node.
    """

    __slots__ = ("halfwidth", "panels", "variant", "nodes", "weights")

    def __init__(self, halfwidth=30.0, panels: int = 350, variant: str = "weddle"):
        if panels < 1:
            raise ValueError("panel count must be positive")
        L = asextended(halfwidth)
        if not float(L) > 0.0:
            raise ValueError("halfwidth must be positive")
        npts = 6 * panels + 1
        h = L / (3 * panels)
        offsets = np.arange(npts, dtype=float) - 3.0 * panels
        nodes = h * xp.promote(offsets)
        counts = np.zeros(npts)
        if variant == "weddle":
            pattern, scale = _WEDDLE_PATTERN, h * 3 / 10
        elif variant == "newtoncotes":
            pattern, scale = _NEWTON_COTES_PATTERN, h / 140
        else:
            raise ValueError(f"unknown quadrature variant {variant!r}")
        # accumulate the panel pattern; interior panel boundaries share weight
        for p in range(panels):
            counts[6 * p: 6 * p + 7] += np.asarray(pattern, dtype=float)
        weights = xp.promote(counts) * scale
        object.__setattr__(self, "halfwidth", L)
        object.__setattr__(self, "panels", panels)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __setattr__(self, name, value):
        raise AttributeError("QuadratureRule is immutable")

    @property
    def point_count(self) -> int:
        return 6 * self.panels + 1

    def __repr__(self):
        return (f"QuadratureRule(halfwidth={float(self.halfwidth):g}, "
                f"panels={self.panels}, variant={self.variant!r})")


def integrate(rule: QuadratureRule, integrand: Callable) -> ExtendedReal:
    """Integrate a function of an ExtendedReal array over [-L, L]."""
    values = integrand(rule.nodes)
    if not isinstance(values, ExtendedReal):
        values = xp.promote(np.asarray(values, dtype=float))
    return (rule.weights * values).sum()


@dataclass(frozen=True)
class MomentTable:
    """Moments mu_0 .. mu_{count-1}; odd entries are exactly zero."""

    mu: tuple
    method: str
    quadrature_spec: tuple = (None, None)
    breakdown_index: Optional[int] = None

    def __len__(self):
        return len(self.mu)

    def __getitem__(self, k) -> ExtendedReal:
        return self.mu[k]


def _even_powers(x: ExtendedReal, max_half: int):
    """Yield x^(2j) for j = 0..max_half via binary powering over x^2 squarings."""
    squarings = [x * x]
    while 2 ** len(squarings) <= max_half:
        squarings.append(squarings[-1] * squarings[-1])
    shape = np.asarray(x.hi).shape
    for j in range(max_half + 1):
        acc = None
        jj, bit = j, 0
        while jj:
            if jj & 1:
                acc = squarings[bit] if acc is None else acc * squarings[bit]
            jj >>= 1
            bit += 1
        if acc is None:
            acc = xp.promote(np.ones(shape))
        yield acc


def moments_quadrature(pot: EvenPolynomialPotential, count: int,
                       rule: QuadratureRule) -> MomentTable:
    """Brute-force moments by composite quadrature, odd entries forced to zero."""
    if count < 1:
        raise ValueError("need at least one moment")
    _check_tail(pot, count, rule)
    base = rule.weights * pot.weight(rule.nodes)
    zero = ExtendedReal(0.0)
    mu = []
    for j, power in enumerate(_even_powers(rule.nodes, (count - 1) // 2)):
        val = (base * power).sum()
        mu.append(val)
        if 2 * j + 1 < count:
            mu.append(zero)
    mu = mu[:count]
    if not all(float(mu[2 * j]) > 0.0 for j in range((count + 1) // 2)):
        raise ArithmeticError("quadrature produced a nonpositive even moment")
    return MomentTable(tuple(mu), METHOD_QUADRATURE,
                       (float(rule.halfwidth), rule.panels))


def _check_tail(pot: EvenPolynomialPotential, count: int, rule: QuadratureRule):
    """Reject rules whose interval is too small for the requested moments.

    Works in log magnitudes: the endpoint integrand value rho(L) * L^k for the
    largest even index k must sit at least 110 bits below a lower estimate of
    mu_k, obtained by maximizing x^k rho(x) over a grid inside the interval.
    """
    L = float(rule.halfwidth)
    k_top = 2 * ((count - 1) // 2)
    log_tail = -float(pot.phi(L)) + k_top * math.log(L)
    xs = L * np.linspace(1.0 / 64.0, 1.0 - 1.0 / 64.0, 63)
    log_mu_est = max(
        k_top * math.log(t) - float(pot.phi(float(t))) for t in xs
    ) + math.log(L / 64.0)
    if log_tail > log_mu_est - 110.0 * math.log(2.0):
        raise ValueError(
            "interval too small for requested moment count "
            f"(count={count}, halfwidth={L:g})")


def moments_recursion(pot: EvenPolynomialPotential, seeds: Sequence,
                      count: int) -> MomentTable:
    """Forward moment recursion from the m even seeds mu_0 .. mu_{2m-2}.

    2 m v_m mu_{2(m+k)} = (2k+1) mu_{2k} - sum_{p=1}^{m-1} 2 p v_p mu_{2(p+k)}.

    A generated even moment that is not strictly positive marks numerical
    breakdown; the index is recorded on the table rather than aborting, so the
    divergence of the method remains observable downstream.
    """
    m = pot.m
    seeds = [asextended(s) for s in seeds]
    if len(seeds) != m:
        raise ValueError(f"need exactly m={m} seed moments mu_0..mu_{2 * m - 2}")
    if not all(float(s) > 0.0 for s in seeds):
        raise ValueError("seed moments must be strictly positive")
    half = (count + 1) // 2  # number of even moments mu_0..mu_{2(half-1)}
    even = list(seeds)[:half]
    lead = pot.v[m] * (2 * m)
    breakdown = None
    k = 0
    while len(even) < half:
        acc = even[k] * (2 * k + 1)
        for p in range(1, m):
            acc = acc - pot.v[p] * (2 * p) * even[p + k]
        nxt = acc / lead
        if breakdown is None and not (float(nxt) > 0.0 and math.isfinite(float(nxt))):
            breakdown = 2 * (m + k)
        even.append(nxt)
        k += 1
    zero = ExtendedReal(0.0)
    mu = []
    for j in range(count):
        mu.append(even[j // 2] if j % 2 == 0 else zero)
    return MomentTable(tuple(mu), METHOD_RECURSION, breakdown_index=breakdown)


def recursion_seeds(pot: EvenPolynomialPotential, rule: QuadratureRule,
                    precision: str = "extended"):
    """Seed moments mu_0 .. mu_{2m-2} for the forward recursion.

    precision="extended" evaluates the seed integrals in double-word
    arithmetic; precision="native" evaluates them in binary64, which models a
    seed pipeline computed with an off-the-shelf double-precision quadrature.
    Seed accuracy is what governs how far the recursion-based moment route
    stays usable, so the choice is exposed explicitly.
    """
    if precision == "extended":
        table = moments_quadrature(pot, 2 * pot.m - 1, rule)
        return [table[2 * j] for j in range(pot.m)]
    if precision != "native":
        raise ValueError("precision must be 'extended' or 'native'")
    x = np.asarray(rule.nodes.hi, dtype=float)
    w = np.asarray(rule.weights.hi, dtype=float) + np.asarray(rule.weights.lo, dtype=float)
    phi = np.full_like(x, float(pot.v[pot.m]))
    t = x * x
    for p in range(pot.m - 1, -1, -1):
        phi = phi * t + float(pot.v[p])
    with np.errstate(under="ignore"):
        rho = np.exp(-phi)
    seeds = []
    for j in range(pot.m):
        seeds.append(ExtendedReal(float(np.sum(w * rho * t ** j))))
    return seeds


def hermite_moments_closed_form(count: int) -> MomentTable:
    """mu_{2k} = (2k)! / (2^k k!) for the normalized Gaussian weight."""
    if count > 600:
        raise ValueError("closed-form table supported up to 600 moments")
    zero = ExtendedReal(0.0)
    mu = []
    for j in range(count):
        if j % 2:
            mu.append(zero)
        else:
            k = j // 2
            mu.append(ExtendedReal.from_int(
                math.factorial(2 * k) // (2 ** k * math.factorial(k))))
    return MomentTable(tuple(mu), METHOD_CLOSED_FORM)


def first_disagreement(a: MomentTable, b: MomentTable, rtol: float = 1e-15) -> Optional[int]:
    """First even index where two tables disagree beyond rtol, else None."""
    n = min(len(a), len(b))
    for k in range(0, n, 2):
        va, vb = a[k], b[k]
        denom = abs(float(va)) or 1.0
        if abs(float(va - vb)) / denom > rtol:
            return k
    return None
