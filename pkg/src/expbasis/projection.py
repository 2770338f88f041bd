"""Spectral projection onto the polynomial basis and convergence measurement.

The projection of f onto span{P_0..P_N} has coefficients c_k = integral of
f P_k rho; the projection error is measured two ways (direct quadrature of
the residual, and the norm identity ||f||^2 - sum c_k^2) with the direct
value as the primary one.  Convergence orders are fitted as least-squares
slopes on a log-log grid, with a flag for super-polynomial (spectral) decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import extprec as xp
from .extprec import ExtendedReal
from .chebyshev import RecurrenceCoefficients
from .moments import QuadratureRule
from .orthopoly import eval_basis
from .weight import EvenPolynomialPotential

__all__ = [
    "TestFunction",
    "standard_roster",
    "one_sided_power",
    "project",
    "projection_error",
    "ProjectionError",
    "run_sweep",
    "ProjectionReport",
    "convergence_order",
    "ConvergenceFit",
    "poincare_ratio",
    "gamma_sequence",
    "DEFAULT_SWEEP",
    "NOISE_FLOOR",
]

NOISE_FLOOR = 1e-24

# Sweep grid for order fitting: odd N in [11, 59].  A single-parity grid is
# used because one-sided powers under an even weight gain new coefficients
# only at every other rank, and sampling both parities fits the resulting
# staircase rather than the decay envelope.
DEFAULT_SWEEP = tuple(range(11, 60, 2))


@dataclass(frozen=True)
class TestFunction:
    """A projection-study function, optionally with derivative and
    double-word evaluation (float sampling is used otherwise)."""

    name: str
    fn: Callable
    derivative: Optional[Callable] = None
    dd_fn: Optional[Callable] = None
    theoretical_order: Optional[float] = None
    smooth: bool = True

    def sample(self, nodes: ExtendedReal) -> ExtendedReal:
        if self.dd_fn is not None:
            return self.dd_fn(nodes)
        vals = self.fn(np.asarray(nodes.hi) + np.asarray(nodes.lo))
        return xp.promote(np.asarray(vals, dtype=float))

    def sample_derivative(self, nodes: ExtendedReal) -> ExtendedReal:
        if self.derivative is None:
            raise ValueError(f"{self.name} carries no derivative")
        vals = self.derivative(np.asarray(nodes.hi) + np.asarray(nodes.lo))
        return xp.promote(np.asarray(vals, dtype=float))


def one_sided_power(k: int) -> TestFunction:
    """f_k(x) = x^k for x >= 0, else 0; lies in H^k but not H^{k+1}.

    The node at x = 0 (a panel boundary) takes the right-limit value, which
    for k >= 1 is 0 either way.
    """
    if k < 1:
        raise ValueError("one-sided powers defined for k >= 1")

    def _dd(x: ExtendedReal) -> ExtendedReal:
        mask = np.asarray(x.hi) >= 0.0
        return xp.where(mask, x ** k, ExtendedReal(0.0))

    def _fn(x):
        return np.where(x >= 0.0, x ** k, 0.0)

    def _deriv(x):
        return np.where(x >= 0.0, k * x ** (k - 1), 0.0)

    return TestFunction(f"x^{k}_plus", _fn, _deriv, _dd,
                        theoretical_order=k / 2.0, smooth=False)


_TENTH = ExtendedReal.from_str("0.1")


def standard_roster() -> list:
    """The seven study functions: exp(x), exp(0.1 x^2), cos(x), x^k_+ (k=1..4)."""
    smooth = [
        TestFunction("exp", np.exp, np.exp, lambda x: xp.exp(x)),
        TestFunction("exp01sq", lambda x: np.exp(0.1 * x * x),
                     lambda x: 0.2 * x * np.exp(0.1 * x * x),
                     lambda x: xp.exp(x * x * _TENTH)),
        TestFunction("cos", np.cos, lambda x: -np.sin(x)),
    ]
    return smooth + [one_sided_power(k) for k in range(1, 5)]


def _weighted_nodes(pot: EvenPolynomialPotential, rule: QuadratureRule) -> ExtendedReal:
    return rule.weights * pot.weight(rule.nodes)


def project(f: TestFunction, N: int, coeffs: RecurrenceCoefficients,
            pot: EvenPolynomialPotential, rule: QuadratureRule):
    """Projection coefficients c_0..c_N of f in L^2(rho)."""
    basis = eval_basis(coeffs, N, rule.nodes)
    base = f.sample(rule.nodes) * _weighted_nodes(pot, rule)
    return [(base * basis.row(k)).sum() for k in range(N + 1)]


@dataclass(frozen=True)
class ProjectionError:
    """Both error routes: direct quadrature (primary) and the norm identity."""

    direct: ExtendedReal
    identity_sq: ExtendedReal

    @property
    def gap(self) -> float:
        return abs(float(self.direct) ** 2 - float(self.identity_sq))

    def __float__(self):
        return float(self.direct)


def projection_error(f: TestFunction, N: int, coeffs: RecurrenceCoefficients,
                     pot: EvenPolynomialPotential, rule: QuadratureRule) -> ProjectionError:
    """|| f - projection onto span{P_0..P_N} || in L^2(rho)."""
    report = run_sweep(f, [N], coeffs, pot, rule, keep_errors=True)
    return report.error_objects[0]


@dataclass(frozen=True)
class ProjectionReport:
    """Per-N projection errors for one function, with the fitted order."""

    function: str
    points: tuple                      # ((N, error_float), ...)
    fit: Optional["ConvergenceFit"]
    theoretical_order: Optional[float]
    error_objects: tuple = ()


def run_sweep(f: TestFunction, Ns: Sequence[int], coeffs: RecurrenceCoefficients,
              pot: EvenPolynomialPotential, rule: QuadratureRule,
              fit: bool = False, keep_errors: bool = False) -> ProjectionReport:
    """Measure projection errors at each N in Ns (shared basis evaluation)."""
    Ns = sorted(set(int(N) for N in Ns))
    top = Ns[-1]
    coeffs.require(top + 2)
    basis = eval_basis(coeffs, top, rule.nodes)
    wrho = _weighted_nodes(pot, rule)
    fvals = f.sample(rule.nodes)
    base = fvals * wrho
    norm_sq = (base * fvals).sum()
    partial = None
    coeff_sq = ExtendedReal(0.0)
    points = []
    errors = []
    want = set(Ns)
    for k in range(top + 1):
        ck = (base * basis.row(k)).sum()
        contrib = basis.row(k) * ck
        partial = contrib if partial is None else partial + contrib
        coeff_sq = coeff_sq + ck * ck
        if k in want:
            resid = fvals - partial
            direct_sq = (resid * resid * wrho).sum()
            direct = xp.sqrt(direct_sq) if float(direct_sq) >= 0.0 else ExtendedReal(0.0)
            err = ProjectionError(direct, norm_sq - coeff_sq)
            if float(err.identity_sq) < -1e-18 * max(float(norm_sq), 1.0):
                raise ArithmeticError(
                    f"norm identity went negative at N={k}: {float(err.identity_sq)}")
            points.append((k, float(direct)))
            errors.append(err)
    fitted = convergence_order(points) if fit else None
    return ProjectionReport(f.name, tuple(points), fitted, f.theoretical_order,
                            tuple(errors) if keep_errors else ())


@dataclass(frozen=True)
class ConvergenceFit:
    """Least-squares slope of log error^2 against log N.

    order is -slope, so error^2 ~ N^(-order); order_error = order/2 is the
    exponent on the error itself.  spectral means the decay accelerated across
    the window instead of following a stable power law.
    """

    order: float
    order_error: float
    n_points: int
    window: tuple
    spectral: bool


def convergence_order(points: Sequence, noise_floor: float = NOISE_FLOOR) -> ConvergenceFit:
    """Fit the convergence order from (N, error) pairs above the noise floor."""
    usable = [(n, e) for n, e in points if e > noise_floor]
    if len(usable) < 4:
        raise ValueError(f"need at least 4 points above the noise floor, got {len(usable)}")
    logn = np.log([n for n, _ in usable])
    loge = np.log([e for _, e in usable])
    slope = np.polyfit(logn, 2.0 * loge, 1)[0]
    half = len(usable) // 2
    o1 = -np.polyfit(logn[:half], loge[:half], 1)[0]
    o2 = -np.polyfit(logn[half:], loge[half:], 1)[0]
    spectral = bool(o2 > 1.3 * o1 + 0.25 and o2 > 1.0)
    return ConvergenceFit(order=float(-slope), order_error=float(-slope) / 2.0,
                          n_points=len(usable),
                          window=(usable[0][0], usable[-1][0]), spectral=spectral)


def poincare_ratio(f: TestFunction, pot: EvenPolynomialPotential,
                   rule: QuadratureRule) -> ExtendedReal:
    """Witness ratio  integral((1 + phi'^2) |f - <f>|^2 rho) / integral(f'^2 rho).

    <f> is the mean against the probability normalization of rho.  Every
    witnessed ratio is a lower bound for the constant of the weighted
    inequality; a constant f (zero denominator) has no ratio.
    """
    nodes = rule.nodes
    wrho = _weighted_nodes(pot, rule)
    fv = f.sample(nodes)
    dv = f.sample_derivative(nodes)
    rhs = (dv * dv * wrho).sum()
    if float(rhs) == 0.0:
        raise ValueError("ratio undefined for a constant function")
    mu0 = wrho.sum()
    mean = (fv * wrho).sum() / mu0
    centered = fv - mean
    phip = pot.phi_prime(nodes)
    lhs = ((phip * phip + 1.0) * centered * centered * wrho).sum()
    return lhs / rhs


def gamma_sequence(k: int) -> int:
    """Regularity indices: gamma_0 = 1, gamma_{n+1} = 2^(gamma_n + 1) + gamma_n + 2.

    Exact integers; gamma_3 already has 267 bits and gamma_4 would need about
    10^80 bits, so indices beyond 3 raise a range error.
    """
    if k < 0:
        raise ValueError("index must be nonnegative")
    if k > 3:
        raise OverflowError("gamma_k is astronomically large for k > 3")
    g = 1
    for _ in range(k):
        g = 2 ** (g + 1) + g + 2
    return g
