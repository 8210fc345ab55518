"""Interior limit-order placement distributions g(i | s).

With a spread of s ticks there are s - 1 interior quotes. The placement
distance i is measured from the order's own best quote (a sell i ticks below
the best ask, a buy i ticks above the best bid), so landing at distance i
shrinks the spread by exactly i: s' = s - i.

Two mechanisms are supported: a uniform profile over the interior quotes and
a peaked profile that puts mass alpha on the quote adjacent to the best
(i = 1) and splits the remainder evenly over i = 2 .. s - 1. At s = 2 the
single interior quote forces i = 1 under either mechanism.

Arithmetic is polymorphic: pass `fractions.Fraction` parameters to get exact
rational probabilities (the uniform pmf is always an exact Fraction).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Uniform:
    """Equal mass on every interior quote."""

    name = "uniform"


@dataclass(frozen=True)
class NonUniform:
    """Mass `alpha` adjacent to the best, the rest flat over the interior."""

    alpha: Real

    name = "nonuniform"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")


DepositionMechanism = Uniform | NonUniform


def _check_spread(s: int) -> None:
    if s < 2:
        raise DomainError(f"spread must be >= 2 for interior placement, got {s}")


def pmf(mech: DepositionMechanism, s: int, i: int):
    """Probability that an interior order at spread s lands at distance i.

    Exact: Fraction for Uniform, and for NonUniform whenever alpha is a
    Fraction; plain floats otherwise.
    """
    _check_spread(s)
    if not 1 <= i <= s - 1:
        raise DomainError(f"distance i must lie in [1, {s - 1}], got {i}")
    if isinstance(mech, Uniform):
        return Fraction(1, s - 1)
    if s == 2:
        return Fraction(1)
    if i == 1:
        return mech.alpha
    return (1 - mech.alpha) / (s - 2)


def pmf_vector(mech: DepositionMechanism, s: int) -> np.ndarray:
    """pmf values for i = 1 .. s-1 as a float array (for bulk summation)."""
    _check_spread(s)
    if isinstance(mech, Uniform):
        return np.full(s - 1, 1.0 / (s - 1))
    if s == 2:
        return np.array([1.0])
    alpha = float(mech.alpha)
    out = np.full(s - 1, (1.0 - alpha) / (s - 2))
    out[0] = alpha
    return out


def cdf_inverse(mech: DepositionMechanism, s: int, u: float) -> int:
    """Map one uniform draw u in [0, 1) to a placement distance."""
    _check_spread(s)
    if s == 2:
        return 1
    if isinstance(mech, Uniform):
        i = 1 + int(u * (s - 1))
        return min(i, s - 1)
    alpha = float(mech.alpha)
    if u < alpha:
        return 1
    i = 2 + int((u - alpha) / (1.0 - alpha) * (s - 2))
    return min(i, s - 1)


def sample(mech: DepositionMechanism, s: int, rng: np.random.Generator) -> int:
    """Draw a placement distance in [1, s-1] using a single uniform draw."""
    return cdf_inverse(mech, s, rng.random())


def mechanism_from_name(name: str, alpha: Real | None = None) -> DepositionMechanism:
    name = name.strip().lower()
    if name == "uniform":
        return Uniform()
    if name == "nonuniform":
        if alpha is None:
            raise DomainError("nonuniform mechanism requires alpha")
        return NonUniform(alpha)
    raise DomainError(f"unknown deposition mechanism {name!r}")
