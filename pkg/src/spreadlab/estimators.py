"""Statistical estimators over classified spread-event series.

All estimators work on a SpreadEventSeries regardless of where it came from
(simulation export or quote-tape ingestion) and depend only on record order,
never on the absolute values of the event index t.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .book import EventKind
from .csvio import format_rows, iter_csv_rows
from .errors import (
    DomainError,
    EmptySeries,
    NoConditioningEvents,
    NoSuchSpread,
    SeriesTooShort,
    ZeroVariance,
)

EVENT_CSV_COLUMNS = ("t", "s_pre", "s_post", "kind")


@dataclass
class SpreadEventSeries:
    """Ordered spread events: index t, pre/post spread, event kind, optional mid.

    Kinds follow the spread-direction contract of tape classification:
    a LIMIT record must shrink the spread and a MARKET record must widen it.
    UNKNOWN records are unconstrained (used for unclassifiable events such as
    spread-widening cancellations, and for raw unclassified streams).
    """

    t: np.ndarray
    s_pre: np.ndarray
    s_post: np.ndarray
    kind: np.ndarray
    mid2: np.ndarray | None = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.int64)
        self.s_pre = np.asarray(self.s_pre, dtype=np.int64)
        self.s_post = np.asarray(self.s_post, dtype=np.int64)
        self.kind = np.asarray(self.kind, dtype=np.int8)
        if self.mid2 is not None:
            self.mid2 = np.asarray(self.mid2, dtype=np.int64)
        n = len(self.t)
        for name in ("s_pre", "s_post", "kind"):
            if len(getattr(self, name)) != n:
                raise DomainError(f"{name} length differs from t")
        if self.mid2 is not None and len(self.mid2) != n:
            raise DomainError("mid2 length differs from t")
        if n:
            if np.any(np.diff(self.t) <= 0):
                raise DomainError("event index t must be strictly increasing")
            if self.s_pre.min() < 1 or self.s_post.min() < 1:
                raise DomainError("spreads must be >= 1 tick")
            limit = self.kind == EventKind.LIMIT
            if np.any(self.s_post[limit] >= self.s_pre[limit]):
                raise DomainError("limit-order records must have s_post < s_pre")
            market = self.kind == EventKind.MARKET
            if np.any(self.s_post[market] <= self.s_pre[market]):
                raise DomainError("market-order records must have s_post > s_pre")

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def from_records(cls, records) -> "SpreadEventSeries":
        """Build from an iterable of (t, s_pre, s_post, kind[, mid2]) tuples."""
        rows = list(records)
        if rows and len(rows[0]) >= 5:
            t, pre, post, kind, mid2 = zip(*rows)
            return cls(np.array(t), np.array(pre), np.array(post),
                       np.array([int(k) for k in kind]), np.array(mid2))
        if rows:
            t, pre, post, kind = zip(*rows)
            return cls(np.array(t), np.array(pre), np.array(post),
                       np.array([int(k) for k in kind]))
        empty = np.array([], dtype=np.int64)
        return cls(empty, empty.copy(), empty.copy(), empty.copy())

    @classmethod
    def from_csv(cls, source) -> "SpreadEventSeries":
        """Read an event CSV (columns t,s_pre,s_post,kind[,mid]); '#' lines skipped."""
        rows = iter_csv_rows(source)
        header = next(rows, None)
        if header is None:
            raise EmptySeries("event CSV has no header row")
        cols = [c.strip() for c in header]
        if cols[: len(EVENT_CSV_COLUMNS)] != list(EVENT_CSV_COLUMNS):
            raise DomainError(
                f"event CSV must start with columns {','.join(EVENT_CSV_COLUMNS)}"
            )
        has_mid = len(cols) > 4 and cols[4] == "mid"
        t, pre, post, kind, mid2 = [], [], [], [], []
        for row in rows:
            if not row:
                continue
            t.append(int(row[0]))
            pre.append(int(row[1]))
            post.append(int(row[2]))
            kind.append(int(EventKind.from_label(row[3])))
            if has_mid:
                mid2.append(int(round(2 * float(row[4]))))
        arrays = (np.array(t, dtype=np.int64), np.array(pre, dtype=np.int64),
                  np.array(post, dtype=np.int64), np.array(kind, dtype=np.int8))
        return cls(*arrays, np.array(mid2, dtype=np.int64) if has_mid else None)

    def to_csv(self, comments: dict | None = None, include_mid: bool = False) -> str:
        """Serialize; the standard interchange form is the four t,s_pre,s_post,kind columns."""
        include_mid = include_mid and self.mid2 is not None
        cols = EVENT_CSV_COLUMNS + (("mid",) if include_mid else ())
        buf = io.StringIO()
        rows = (
            (int(self.t[i]), int(self.s_pre[i]), int(self.s_post[i]),
             EventKind(int(self.kind[i])).label)
            + ((f"{self.mid2[i] / 2:.1f}",) if include_mid else ())
            for i in range(len(self))
        )
        format_rows(buf, cols, rows, comments)
        return buf.getvalue()


@dataclass(frozen=True)
class ParityCell:
    s: int
    count: int
    odd_frequency: float
    low_statistics: bool


@dataclass
class ConditionalParity:
    """Empirical parity of s_post per pre-event spread, limit-order events only."""

    cells: dict[int, ParityCell]
    min_count: int

    def frequency(self, s: int, parity: str) -> float:
        cell = self.cells[s]
        return cell.odd_frequency if parity == "odd" else 1.0 - cell.odd_frequency


@dataclass(frozen=True)
class DeltaSDistribution:
    s: int
    counts: dict[int, int]
    frequencies: dict[int, float]
    n_events: int


@dataclass
class AlphaEstimate:
    """Frequency of one-tick spread reductions per pre-event spread (s >= 3)."""

    by_spread: dict[int, tuple[int, float]]  # s -> (count, alpha_hat)
    weighted_average: float


@dataclass
class AbsReturnAcf:
    lags: np.ndarray
    values: np.ndarray
    decay_constant: float
    fit_window: tuple[int, int]
    n_fit_points: int

    def as_map(self) -> dict[int, float]:
        return {int(l): float(v) for l, v in zip(self.lags, self.values)}


@dataclass
class RelaxationCurve:
    """Mean spread at lag tau after a jump of size delta, minus the global mean."""

    delta: int
    lags: np.ndarray
    values: np.ndarray          # NaN where counts == 0
    counts: np.ndarray
    mean_spread: float
    n_conditioning: int

    def as_map(self) -> dict[int, float]:
        return {int(l): float(v) for l, v, c in
                zip(self.lags, self.values, self.counts) if c > 0}


def _require_nonempty(series: SpreadEventSeries) -> None:
    if len(series) == 0:
        raise EmptySeries("series contains no events")


def odd_fraction(series: SpreadEventSeries) -> float:
    """Fraction of records whose post-event spread is odd."""
    _require_nonempty(series)
    return float(np.mean(series.s_post % 2 == 1))


def _limit_mask(series: SpreadEventSeries) -> np.ndarray:
    # Spread reduction identifies limit orders; kind labels are not trusted
    # here so ingested and simulated series are treated identically.
    return series.s_post < series.s_pre


def conditional_parity_frequency(
    series: SpreadEventSeries, min_count: int = 50
) -> ConditionalParity:
    """Empirical P(s_post odd | s_pre = s) over spread-reducing events."""
    _require_nonempty(series)
    mask = _limit_mask(series)
    if not mask.any():
        raise EmptySeries("series contains no spread-reducing events")
    pre = series.s_pre[mask]
    odd = series.s_post[mask] % 2 == 1
    cells = {}
    for s in np.unique(pre):
        sel = pre == s
        n = int(sel.sum())
        cells[int(s)] = ParityCell(
            s=int(s),
            count=n,
            odd_frequency=float(odd[sel].mean()),
            low_statistics=n < min_count,
        )
    return ConditionalParity(cells=cells, min_count=min_count)


def delta_s_distribution(series: SpreadEventSeries, s: int) -> DeltaSDistribution:
    """Normalized histogram of the spread reduction at pre-event spread s."""
    _require_nonempty(series)
    mask = _limit_mask(series) & (series.s_pre == s)
    if not mask.any():
        raise NoSuchSpread(f"no spread-reducing events at pre-spread {s}")
    deltas = (series.s_pre[mask] - series.s_post[mask]).astype(np.int64)
    values, counts = np.unique(deltas, return_counts=True)
    n = int(counts.sum())
    return DeltaSDistribution(
        s=s,
        counts={int(v): int(c) for v, c in zip(values, counts)},
        frequencies={int(v): float(c) / n for v, c in zip(values, counts)},
        n_events=n,
    )


def alpha_estimate(series: SpreadEventSeries) -> AlphaEstimate:
    """Per-spread frequency of one-tick reductions, plus its count-weighted mean.

    s = 2 is excluded: a one-tick reduction is forced there, so the frequency
    carries no information about the placement profile.
    """
    _require_nonempty(series)
    mask = _limit_mask(series) & (series.s_pre >= 3)
    if not mask.any():
        raise EmptySeries("no spread-reducing events with s_pre >= 3")
    pre = series.s_pre[mask]
    adjacent = (pre - series.s_post[mask]) == 1
    by_spread = {}
    total = 0
    weighted = 0.0
    for s in np.unique(pre):
        sel = pre == s
        n = int(sel.sum())
        a_hat = float(adjacent[sel].mean())
        by_spread[int(s)] = (n, a_hat)
        total += n
        weighted += n * a_hat
    return AlphaEstimate(by_spread=by_spread, weighted_average=weighted / total)


def _autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = len(x)
    xd = x - x.mean()
    m = 1
    while m < 2 * n:
        m <<= 1
    f = np.fft.rfft(xd, m)
    acov = np.fft.irfft(f * np.conj(f))[: max_lag + 1] / n
    return acov[1:] / acov[0]


def acf_abs_returns(
    mid2: np.ndarray,
    max_lag: int,
    fit_window: tuple[int, int] | None = None,
) -> AbsReturnAcf:
    """Autocorrelation of absolute half-tick returns with an exponential fit.

    The decay constant comes from a least-squares line through log ACF over
    `fit_window` (defaults to lags 10..max_lag, skipping the short-lag region
    the exponential does not describe), truncated at the first non-positive
    ACF value.
    """
    if max_lag < 1:
        raise DomainError(f"max_lag must be >= 1, got {max_lag}")
    mid2 = np.asarray(mid2, dtype=np.float64)
    if len(mid2) <= 10 * max_lag:
        raise SeriesTooShort(
            f"need more than {10 * max_lag} observations for max_lag={max_lag}, "
            f"got {len(mid2)}"
        )
    abs_ret = np.abs(np.diff(mid2))
    if abs_ret.max() == abs_ret.min():
        raise ZeroVariance("absolute returns are constant")
    acf = _autocorrelation(abs_ret, max_lag)
    lags = np.arange(1, max_lag + 1)

    lo, hi = fit_window if fit_window is not None else (min(10, max_lag), max_lag)
    if not 1 <= lo <= hi <= max_lag:
        raise DomainError(f"fit window ({lo}, {hi}) outside [1, {max_lag}]")
    window = acf[lo - 1 : hi]
    nonpositive = np.nonzero(window <= 0)[0]
    end = nonpositive[0] if len(nonpositive) else len(window)
    if end < 4:
        # no exponential regime to fit (white noise, or the window starts
        # past the noise floor); the ACF itself is still meaningful
        decay = float("nan")
    else:
        y = np.log(window[:end])
        x = lags[lo - 1 : lo - 1 + end].astype(np.float64)
        slope = np.polyfit(x, y, 1)[0]
        decay = float("inf") if slope >= 0 else -1.0 / slope
    return AbsReturnAcf(
        lags=lags,
        values=acf,
        decay_constant=decay,
        fit_window=(lo, lo + max(end, 1) - 1),
        n_fit_points=int(end),
    )


def spread_relaxation(
    series: SpreadEventSeries | np.ndarray,
    delta: int,
    max_lag: int,
) -> RelaxationCurve:
    """Conditional mean spread path after a one-event spread jump of `delta`.

    Lags count events. The unconditional mean is taken over the whole series,
    and overlapping conditioning windows all contribute independently.
    """
    if delta == 0:
        raise DomainError("delta must be nonzero")
    if max_lag < 0:
        raise DomainError("max_lag must be >= 0")
    s = series.s_post if isinstance(series, SpreadEventSeries) else np.asarray(series)
    s = s.astype(np.float64)
    if len(s) < 2:
        raise EmptySeries("series too short to form spread jumps")
    jumps = np.diff(s)
    cond = np.nonzero(jumps == delta)[0] + 1
    if len(cond) == 0:
        raise NoConditioningEvents(f"no events with spread jump {delta:+d}")
    mean_s = float(s.mean())
    n = len(s)
    lags = np.arange(max_lag + 1)
    values = np.full(max_lag + 1, np.nan)
    counts = np.zeros(max_lag + 1, dtype=np.int64)
    for tau in lags:
        idx = cond + tau
        idx = idx[idx < n]
        counts[tau] = len(idx)
        if len(idx):
            values[tau] = s[idx].mean() - mean_s
    return RelaxationCurve(
        delta=delta,
        lags=lags,
        values=values,
        counts=counts,
        mean_spread=mean_s,
        n_conditioning=int(len(cond)),
    )
