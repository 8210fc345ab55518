"""Discrete-tick limit order book with unit-volume resting orders.

Prices live on a positive integer grid (one tick is the price unit) and every
resting order has volume one, so a book side reduces to a counter per price.
Best quotes are the highest occupied bid and the lowest occupied ask; the
spread is their difference and is always a positive integer while both sides
are occupied.
"""

from __future__ import annotations

from enum import Enum, IntEnum

from .errors import CrossingOrder, DomainError, EmptySide

# Prices are plain ints on the positive tick grid.
TickPrice = int


class Side(Enum):
    BUY = "buy"
    SELL = "sell"

    @property
    def opposite(self) -> "Side":
        return Side.SELL if self is Side.BUY else Side.BUY


class EventKind(IntEnum):
    """Order-book event kinds shared by the simulator, tape classifier and estimators."""

    MARKET = 0
    LIMIT = 1
    CANCEL = 2
    UNKNOWN = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "EventKind":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise DomainError(f"unknown event kind {label!r}") from None


class BookSide:
    """Resting volume per tick price on one side of the book.

    The buy side's best quote is its maximum occupied price, the sell side's
    is its minimum. Quotes with zero volume are removed eagerly so the
    occupied set is exactly the keys of the volume map.
    """

    __slots__ = ("side", "_volumes")

    def __init__(self, side: Side, volumes: dict[TickPrice, int] | None = None):
        self.side = side
        self._volumes: dict[TickPrice, int] = {}
        if volumes:
            for price, volume in volumes.items():
                self.add(price, volume)

    def add(self, price: TickPrice, volume: int = 1) -> None:
        if price < 1:
            raise DomainError(f"price must be >= 1 tick, got {price}")
        if volume < 0:
            raise DomainError(f"volume must be >= 0, got {volume}")
        if volume == 0:
            return
        self._volumes[price] = self._volumes.get(price, 0) + volume

    def remove(self, price: TickPrice, volume: int = 1) -> None:
        held = self._volumes.get(price, 0)
        if held < volume:
            raise EmptySide(f"no {volume} unit(s) resting at price {price}")
        if held == volume:
            del self._volumes[price]
        else:
            self._volumes[price] = held - volume

    def volume_at(self, price: TickPrice) -> int:
        return self._volumes.get(price, 0)

    @property
    def is_empty(self) -> bool:
        return not self._volumes

    @property
    def total_volume(self) -> int:
        return sum(self._volumes.values())

    @property
    def best(self) -> TickPrice:
        if not self._volumes:
            raise EmptySide(f"{self.side.value} side has no resting volume")
        return max(self._volumes) if self.side is Side.BUY else min(self._volumes)

    @property
    def farthest(self) -> TickPrice:
        if not self._volumes:
            raise EmptySide(f"{self.side.value} side has no resting volume")
        return min(self._volumes) if self.side is Side.BUY else max(self._volumes)

    @property
    def span(self) -> int:
        """Occupied extent in ticks, best to farthest quote inclusive."""
        return abs(self.best - self.farthest) + 1

    def granularity(self) -> float:
        """Linear density of resting volume over the occupied span."""
        return self.total_volume / self.span

    def occupied(self) -> list[TickPrice]:
        return sorted(self._volumes)

    def volumes(self) -> dict[TickPrice, int]:
        return dict(self._volumes)

    def __len__(self) -> int:
        return len(self._volumes)


class OrderBook:
    """Two-sided book over the integer tick grid."""

    __slots__ = ("bids", "asks")

    def __init__(
        self,
        bids: dict[TickPrice, int] | None = None,
        asks: dict[TickPrice, int] | None = None,
    ):
        self.bids = BookSide(Side.BUY, bids)
        self.asks = BookSide(Side.SELL, asks)
        self._check_uncrossed()

    def _check_uncrossed(self) -> None:
        if not self.bids.is_empty and not self.asks.is_empty:
            if self.bids.best >= self.asks.best:
                raise CrossingOrder(
                    f"book is crossed: best bid {self.bids.best} >= best ask {self.asks.best}"
                )

    @property
    def best_bid(self) -> TickPrice:
        return self.bids.best

    @property
    def best_ask(self) -> TickPrice:
        return self.asks.best

    def spread(self) -> int:
        """Best ask minus best bid, in ticks."""
        return self.asks.best - self.bids.best

    def mid2(self) -> int:
        """Mid-price in half-ticks (twice the mid, always an integer)."""
        return self.asks.best + self.bids.best

    def mid(self) -> float:
        return self.mid2() / 2.0

    def side(self, side: Side) -> BookSide:
        return self.bids if side is Side.BUY else self.asks

    def apply_market_order(self, side: Side) -> TickPrice:
        """Execute one unit at the opposite best quote; returns the execution price.

        A buy market order consumes the best ask, a sell one the best bid. If
        that quote empties, the best moves to the next occupied quote and the
        spread widens.
        """
        resting = self.side(side.opposite)
        price = resting.best  # raises EmptySide when there is nothing to hit
        resting.remove(price)
        return price

    def apply_limit_order(self, side: Side, price: TickPrice) -> None:
        """Rest one unit at `price`; never crosses the opposite best.

        A sell must be strictly above the best bid and a buy strictly below
        the best ask (this model has no marketable limit orders). The spread
        shrinks exactly when the price lands strictly inside it.
        """
        if price < 1:
            raise DomainError(f"price must be >= 1 tick, got {price}")
        if side is Side.SELL:
            if not self.bids.is_empty and price <= self.bids.best:
                raise CrossingOrder(
                    f"sell at {price} would cross best bid {self.bids.best}"
                )
        else:
            if not self.asks.is_empty and price >= self.asks.best:
                raise CrossingOrder(
                    f"buy at {price} would cross best ask {self.asks.best}"
                )
        self.side(side).add(price)

    def total_volume(self) -> int:
        return self.bids.total_volume + self.asks.total_volume

    def __repr__(self) -> str:
        bid = None if self.bids.is_empty else self.bids.best
        ask = None if self.asks.is_empty else self.asks.best
        return f"OrderBook(best_bid={bid}, best_ask={ask})"
