"""Even polynomial potentials and the exponential weights they generate.

A potential is an even polynomial ``phi(x) = sum_p v_p x**(2p)`` with positive
leading coefficient, stored through its half-degree coefficients only, so odd
terms are unrepresentable by construction.  The associated weight is
``rho = exp(-phi)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import extprec as xp
from .extprec import ExtendedReal, asextended

__all__ = [
    "EvenPolynomialPotential",
    "hermite_potential",
    "doublewell_potential",
    "potential_from_spec",
]

# Above this potential value the weight underflows the native exponent range;
# quadrature tails beyond it contribute nothing representable.
WEIGHT_UNDERFLOW_THRESHOLD = 709.0

_HALF_LN_2PI = "0.9189385332046727417803297364056176398614"


class EvenPolynomialPotential:
    """phi(x) = v_0 + v_1 x^2 + ... + v_m x^(2m), with m >= 1 and v_m > 0."""

    __slots__ = ("v", "m")

    def __init__(self, coefficients: Sequence):
        v = tuple(asextended(c) for c in coefficients)
        if len(v) < 2:
            raise ValueError("potential must be nonconstant (need m >= 1)")
        if not float(v[-1]) > 0.0:
            raise ValueError("leading coefficient v_m must be positive")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "m", len(v) - 1)

    def __setattr__(self, name, value):
        raise AttributeError("EvenPolynomialPotential is immutable")

    @property
    def degree(self) -> int:
        return 2 * self.m

    def phi(self, x) -> ExtendedReal:
        """Evaluate the potential by Horner recursion in t = x^2."""
        x = asextended(x)
        t = x * x
        acc = self.v[self.m]
        for p in range(self.m - 1, -1, -1):
            acc = acc * t + self.v[p]
        return acc

    def phi_prime(self, x) -> ExtendedReal:
        """phi'(x) = x * sum_p 2 p v_p x^(2p-2)."""
        x = asextended(x)
        t = x * x
        acc = self.v[self.m] * (2 * self.m)
        for p in range(self.m - 1, 0, -1):
            acc = acc * t + self.v[p] * (2 * p)
        return acc * x

    def weight(self, x) -> ExtendedReal:
        """rho(x) = exp(-phi(x)); underflows to exact zero for large |x|."""
        phi = self.phi(x)
        hi = np.asarray(phi.hi)
        if hi.ndim == 0:
            if float(hi) > WEIGHT_UNDERFLOW_THRESHOLD:
                return ExtendedReal(0.0)
            return xp.exp(-phi)
        flooded = hi > WEIGHT_UNDERFLOW_THRESHOLD
        capped = xp.where(flooded, ExtendedReal(0.0), phi)
        values = xp.exp(-capped)
        return xp.where(flooded, xp.promote(np.zeros(hi.shape)), values)

    def to_text(self) -> str:
        return ",".join(str(c) for c in self.v)

    def __repr__(self):
        return f"EvenPolynomialPotential([{self.to_text()}])"


def hermite_potential() -> EvenPolynomialPotential:
    """phi(x) = (x^2 + ln 2 pi) / 2, the normalized Gaussian case."""
    return EvenPolynomialPotential([ExtendedReal.from_str(_HALF_LN_2PI),
                                    ExtendedReal.from_str("0.5")])


def doublewell_potential() -> EvenPolynomialPotential:
    """phi(x) = (x - 1)^2 (x + 1)^2 = x^4 - 2 x^2 + 1."""
    return EvenPolynomialPotential([1, -2, 1])


_PRESETS = {
    "hermite": hermite_potential,
    "doublewell": doublewell_potential,
}


def potential_from_spec(text: str) -> EvenPolynomialPotential:
    """Build a potential from a preset name or a 'v0,v1,...,vm' decimal list."""
    key = text.strip().lower()
    if key in _PRESETS:
        return _PRESETS[key]()
    try:
        coeffs = [ExtendedReal.from_str(part) for part in text.split(",")]
    except (ValueError, ZeroDivisionError) as err:
        raise ValueError(f"cannot parse potential {text!r}: {err}") from None
    return EvenPolynomialPotential(coeffs)
