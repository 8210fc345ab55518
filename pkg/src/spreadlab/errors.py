"""Exception hierarchy shared across the package."""


class SpreadLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SpreadLabError, ValueError):
    """A numeric argument lies outside the operation's domain."""


class EmptySide(SpreadLabError):
    """An operation needed a best quote on a side with no resting volume."""


class CrossingOrder(SpreadLabError):
    """A limit order would cross or match the opposite best quote."""


class ConfigError(SpreadLabError, ValueError):
    """A simulation or CLI configuration violates an invariant."""


class EmptySeries(SpreadLabError):
    """An estimator was applied to an event series with no usable records."""


class NoSuchSpread(SpreadLabError):
    """No qualifying events exist at the requested pre-event spread."""


class SeriesTooShort(SpreadLabError):
    """The input series is too short for the requested lag range."""


class ZeroVariance(SpreadLabError):
    """The series is constant, so correlations are undefined."""


class NoConditioningEvents(SpreadLabError):
    """No event matches the requested spread jump."""


class InsufficientSamples(SpreadLabError):
    """Too few samples survive filtering to form an estimate."""


class ParseError(SpreadLabError):
    """A tape row could not be parsed.

    Carries the 1-based line number and a short reason.
    """

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class OrderingError(ParseError):
    """Timestamps in a quote tape regressed."""


class OffGridPrice(SpreadLabError):
    """A price is not an integer multiple of the tick size within tolerance."""

    def __init__(self, line: int, price: float, residual: float):
        super().__init__(
            f"line {line}: price {price!r} is off the tick grid (residual {residual:.3g})"
        )
        self.line = line
        self.price = price
        self.residual = residual
