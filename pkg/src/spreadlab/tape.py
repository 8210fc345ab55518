"""Quote-tape ingestion: parse best-quote CSVs, snap prices to the tick grid,
and classify spread changes into market and limit orders.

The classification rule works on consecutive quotes: a spread increase is a
market order, a decrease is a limit order, and unchanged spreads emit no
event. Cancellations that move a best quote are indistinguishable from market
orders on a quote tape; their assumed rarity is the documented caveat of the
output metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .book import EventKind
from .csvio import iter_csv_rows
from .errors import (
    DomainError,
    EmptySeries,
    OffGridPrice,
    OrderingError,
    ParseError,
)
from .estimators import SpreadEventSeries

TAPE_COLUMNS = ("timestamp", "bid", "ask")


@dataclass(frozen=True)
class QuoteRecord:
    timestamp: float
    bid: float
    ask: float
    day: str | None = None
    line: int = 0  # 1-based source line, kept for error reporting


@dataclass(frozen=True)
class TickSpec:
    tick_size: float
    tolerance: float = 1e-6

    def __post_init__(self):
        if not self.tick_size > 0:
            raise DomainError(f"tick_size must be > 0, got {self.tick_size}")
        if self.tolerance < 0:
            raise DomainError(f"tolerance must be >= 0, got {self.tolerance}")


@dataclass
class ParsedTape:
    records: list[QuoteRecord]
    rejected: list[tuple[int, str]]  # (line, reason) in lenient mode

    @property
    def has_days(self) -> bool:
        return any(r.day is not None for r in self.records)


def parse_tape(source, strict: bool = True) -> ParsedTape:
    """Parse a quote tape CSV with header timestamp,bid,ask[,day].

    Strict mode raises ParseError/OrderingError at the first bad row; lenient
    mode skips bad rows and reports them. Timestamp regressions are always
    errors (the tape's order is the event order).
    """
    rows = iter_csv_rows(source)
    header = next(rows, None)
    if header is None:
        raise ParseError(1, "empty input, expected header timestamp,bid,ask")
    cols = [c.strip().lower() for c in header]
    if cols[:3] != list(TAPE_COLUMNS):
        raise ParseError(1, f"header must start with {','.join(TAPE_COLUMNS)}")
    has_day = len(cols) > 3 and cols[3] == "day"

    records: list[QuoteRecord] = []
    rejected: list[tuple[int, str]] = []
    last_ts = None
    line = 1
    for row in rows:
        line += 1
        if not row:
            continue
        try:
            if len(row) < 3:
                raise ParseError(line, f"expected at least 3 fields, got {len(row)}")
            try:
                ts = float(row[0])
                bid = float(row[1])
                ask = float(row[2])
            except ValueError as exc:
                raise ParseError(line, f"non-numeric field ({exc})") from None
            if bid <= 0 or ask <= 0:
                raise ParseError(line, f"prices must be positive, got {bid}, {ask}")
            if ask <= bid:
                raise ParseError(line, f"crossed quote: bid {bid} >= ask {ask}")
            day = row[3].strip() if has_day and len(row) > 3 else None
            if last_ts is not None and ts < last_ts:
                raise OrderingError(line, f"timestamp {ts} regressed below {last_ts}")
        except OrderingError:
            raise
        except ParseError as exc:
            if strict:
                raise
            rejected.append((exc.line, exc.reason))
            continue
        last_ts = ts
        records.append(QuoteRecord(ts, bid, ask, day, line))
    return ParsedTape(records=records, rejected=rejected)


def to_ticks(
    records: list[QuoteRecord], spec: TickSpec
) -> tuple[np.ndarray, np.ndarray, list[str] | None]:
    """Convert quote prices to integer ticks; every price must sit on the grid.

    Returns (bid ticks, ask ticks, day labels or None).
    """

    def snap(price: float, line: int) -> int:
        n = round(price / spec.tick_size)
        residual = abs(price - n * spec.tick_size)
        if residual > spec.tolerance or n < 1:
            raise OffGridPrice(line, price, residual)
        return int(n)

    bid = np.empty(len(records), dtype=np.int64)
    ask = np.empty(len(records), dtype=np.int64)
    days: list[str] | None = (
        [r.day or "" for r in records] if any(r.day is not None for r in records) else None
    )
    for i, rec in enumerate(records):
        bid[i] = snap(rec.bid, rec.line)
        ask[i] = snap(rec.ask, rec.line)
    return bid, ask, days


def classify_events(
    bid_ticks: np.ndarray,
    ask_ticks: np.ndarray,
    days: list[str] | None = None,
) -> SpreadEventSeries:
    """Label spread changes between consecutive quotes as market/limit orders.

    The event index t is the row index of the later quote. With a day column,
    comparisons never span a day boundary. A constant-spread tape yields an
    empty series.
    """
    bid_ticks = np.asarray(bid_ticks, dtype=np.int64)
    ask_ticks = np.asarray(ask_ticks, dtype=np.int64)
    if len(bid_ticks) < 2:
        raise EmptySeries("need at least 2 quotes to classify events")
    spreads = ask_ticks - bid_ticks
    if spreads.min() < 1:
        raise DomainError("tick quotes must satisfy ask - bid >= 1")
    prev = spreads[:-1]
    cur = spreads[1:]
    changed = cur != prev
    if days is not None:
        same_day = np.array(
            [days[i + 1] == days[i] for i in range(len(days) - 1)], dtype=bool
        )
        changed &= same_day
    idx = np.nonzero(changed)[0]
    kind = np.where(
        cur[idx] > prev[idx], int(EventKind.MARKET), int(EventKind.LIMIT)
    ).astype(np.int8)
    return SpreadEventSeries(
        t=(idx + 1).astype(np.int64),
        s_pre=prev[idx],
        s_post=cur[idx],
        kind=kind,
        mid2=(bid_ticks[idx + 1] + ask_ticks[idx + 1]),
    )


def ingest(
    source, tick_size: float, tolerance: float = 1e-6, strict: bool = True
) -> tuple[SpreadEventSeries, dict]:
    """Full pipeline: parse, snap to ticks, classify. Returns (series, metadata)."""
    tape = parse_tape(source, strict=strict)
    if len(tape.records) < 2:
        raise EmptySeries("need at least 2 valid quotes to classify events")
    bid, ask, days = to_ticks(tape.records, TickSpec(tick_size, tolerance))
    series = classify_events(bid, ask, days)
    metadata = {
        "rows": len(tape.records),
        "rejected_rows": len(tape.rejected),
        "events": len(series),
        "day_segments": len(set(days)) if days else 1,
        "caveat": "spread-widening cancellations are classified as market orders",
    }
    return series, metadata
