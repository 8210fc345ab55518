"""Closed forms for spread-parity transitions and mean spread change.

A spread-reducing limit order at distance i from its own best quote moves the
spread from s to s' = s - i, so the parity of s' is tied to the parity of i:
for even s the new spread is odd iff i is odd, for odd s iff i is even. Every
table below is therefore fully determined by the odd-distance mass

    O(s) = sum of g(i | s) over odd i in [1, s-1]

and its complement E(s) = 1 - O(s): P(odd s' | even s) = O, P(odd s' | odd s) = E.

All functions accept `fractions.Fraction` parameters and then return exact
rational probabilities; float parameters give floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from .deposition import DepositionMechanism, Uniform, pmf
from .errors import DomainError


@dataclass(frozen=True)
class ParityTransitionTable:
    """Parity of the post-event spread conditioned on the pre-event parity.

    Both rows are row-stochastic. Only the row matching the parity of `s`
    conditions on this table's actual spread; the other row is the same pmf
    read under the opposite-parity labeling and is kept for completeness.
    """

    s: int
    p_odd_given_odd: Real
    p_even_given_odd: Real
    p_odd_given_even: Real
    p_even_given_even: Real

    @property
    def parity(self) -> str:
        return "odd" if self.s % 2 else "even"

    def p_odd(self) -> Real:
        """P(s' odd) for this table's actual spread."""
        return self.p_odd_given_odd if self.s % 2 else self.p_odd_given_even

    def p_even(self) -> Real:
        return 1 - self.p_odd()

    def as_dict(self) -> dict[str, float]:
        return {
            "s": self.s,
            "p_odd_given_odd": float(self.p_odd_given_odd),
            "p_even_given_odd": float(self.p_even_given_odd),
            "p_odd_given_even": float(self.p_odd_given_even),
            "p_even_given_even": float(self.p_even_given_even),
        }


def _table_from_odd_mass(s: int, odd_mass: Real) -> ParityTransitionTable:
    return ParityTransitionTable(
        s=s,
        p_odd_given_odd=1 - odd_mass,
        p_even_given_odd=odd_mass,
        p_odd_given_even=odd_mass,
        p_even_given_even=1 - odd_mass,
    )


def uniform_parity(s: int) -> ParityTransitionTable:
    """Parity transitions under uniform interior deposition.

    Even s: P(odd s') = s / (2 (s-1)); odd s: both outcomes are 1/2. Exact
    Fractions throughout. At s = 2 the only interior quote gives P(odd) = 1.
    """
    if s < 2:
        raise DomainError(f"spread must be >= 2, got {s}")
    if s % 2 == 0:
        odd_mass = Fraction(s, 2 * (s - 1))
    else:
        odd_mass = Fraction(1, 2)
    return _table_from_odd_mass(s, odd_mass)


def nonuniform_parity(alpha: Real, s: int) -> ParityTransitionTable:
    """Parity transitions under the peaked interior profile, s >= 3.

    Even s: P(odd s') = alpha + (1 - alpha) / 2.
    Odd s:  P(even s') = alpha + (1 - alpha) (s-3) / (2 (s-2)).
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if s < 3:
        raise DomainError(f"the peaked profile needs s >= 3, got {s}")
    if s % 2 == 0:
        odd_mass = alpha + (1 - alpha) / 2
    else:
        odd_mass = alpha + ((1 - alpha) * (s - 3)) / (2 * (s - 2))
    return _table_from_odd_mass(s, odd_mass)


def general_parity(mech: DepositionMechanism, s: int) -> ParityTransitionTable:
    """Parity transitions for any deposition mechanism by direct pmf summation."""
    if s < 2:
        raise DomainError(f"spread must be >= 2, got {s}")
    masses = [pmf(mech, s, i) for i in range(1, s, 2)]
    if all(isinstance(m, Fraction) for m in masses):
        odd_mass = sum(masses)
    else:
        odd_mass = math.fsum(masses)
    return _table_from_odd_mass(s, odd_mass)


def mean_relative_spread_change(mech: DepositionMechanism, s: int) -> Real:
    """Expected spread reduction of an interior limit order, relative to s.

    Uniform deposition gives exactly 1/2 for every s, and s = 2 forces 1/2
    under any mechanism. The peaked profile at s >= 3 gives
    alpha / s + (1 - alpha) [s (s-1) - 2] / (2 s (s-2)), which is below 1/2
    whenever s exceeds (alpha + 1) / alpha.
    """
    if s < 2:
        raise DomainError(f"spread must be >= 2, got {s}")
    if isinstance(mech, Uniform) or s == 2:
        return Fraction(1, 2)
    alpha = mech.alpha
    return alpha / s + ((1 - alpha) * (s * (s - 1) - 2)) / (2 * s * (s - 2))


def coupling_boundary(alpha: Real) -> Real:
    """Largest spread at which the peaked profile still closes the spread
    at least as fast as the uniform one: (alpha + 1) / alpha."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return (alpha + 1) / alpha
