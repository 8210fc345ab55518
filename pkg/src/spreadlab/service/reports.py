"""Render estimator results as CSV blobs with self-describing comment headers."""

from __future__ import annotations

import io

import numpy as np

from ..csvio import format_rows
from ..estimators import (
    AbsReturnAcf,
    AlphaEstimate,
    ConditionalParity,
    DeltaSDistribution,
    RelaxationCurve,
)


def _render(columns, rows, comment: str) -> str:
    buf = io.StringIO()
    format_rows(buf, columns, rows, [comment])
    return buf.getvalue()


def odd_fraction_csv(value: float, n_events: int) -> str:
    return _render(
        ("n_events", "odd_fraction"),
        [(n_events, f"{value:.6f}")],
        f"estimator = odd_fraction, n_events = {n_events}",
    )


def conditional_parity_csv(result: ConditionalParity) -> str:
    rows = [
        (s, c.count, f"{c.odd_frequency:.6f}", f"{1.0 - c.odd_frequency:.6f}",
         int(c.low_statistics))
        for s, c in sorted(result.cells.items())
    ]
    total = sum(c.count for c in result.cells.values())
    return _render(
        ("s", "n", "p_odd", "p_even", "low_statistics"),
        rows,
        f"estimator = conditional_parity, n_events = {total}, min_count = {result.min_count}",
    )


def delta_s_csv(result: DeltaSDistribution) -> str:
    rows = [
        (d, result.counts[d], f"{result.frequencies[d]:.6f}")
        for d in sorted(result.counts)
    ]
    return _render(
        ("delta_s", "count", "frequency"),
        rows,
        f"estimator = delta_s_distribution, s = {result.s}, n_events = {result.n_events}",
    )


def alpha_csv(result: AlphaEstimate) -> str:
    rows = [
        (s, n, f"{a:.6f}") for s, (n, a) in sorted(result.by_spread.items())
    ]
    total = sum(n for n, _ in result.by_spread.values())
    return _render(
        ("s", "n", "alpha_hat"),
        rows,
        f"estimator = alpha_estimate, n_events = {total}, "
        f"weighted_average = {result.weighted_average:.6f}",
    )


def acf_csv(result: AbsReturnAcf, n_obs: int) -> str:
    rows = [
        (int(lag), f"{val:.6f}") for lag, val in zip(result.lags, result.values)
    ]
    return _render(
        ("lag", "acf"),
        rows,
        f"estimator = acf_abs_returns, n_obs = {n_obs}, "
        f"decay_constant = {result.decay_constant:.4f}, "
        f"fit_window = {result.fit_window[0]}..{result.fit_window[1]}",
    )


def relaxation_csv(result: RelaxationCurve) -> str:
    rows = [
        (int(lag), "" if np.isnan(val) else f"{val:.6f}", int(cnt))
        for lag, val, cnt in zip(result.lags, result.values, result.counts)
    ]
    return _render(
        ("lag", "g", "count"),
        rows,
        f"estimator = spread_relaxation, delta = {result.delta:+d}, "
        f"n_conditioning = {result.n_conditioning}, "
        f"mean_spread = {result.mean_spread:.6f}",
    )
