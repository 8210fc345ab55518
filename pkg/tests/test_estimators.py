import numpy as np
import pytest

from spreadlab.book import EventKind
from spreadlab.errors import (
    DomainError,
    EmptySeries,
    NoConditioningEvents,
    NoSuchSpread,
    SeriesTooShort,
    ZeroVariance,
)
from spreadlab.estimators import (
    SpreadEventSeries,
    acf_abs_returns,
    alpha_estimate,
    conditional_parity_frequency,
    delta_s_distribution,
    odd_fraction,
    spread_relaxation,
)

U = int(EventKind.UNKNOWN)
L = int(EventKind.LIMIT)
M = int(EventKind.MARKET)


def series_from_posts(posts, kinds=None):
    """Build a consistent series whose s_post sequence is `posts`."""
    posts = list(posts)
    pres = [posts[0]] + posts[:-1]
    if kinds is None:
        kinds = [U] * len(posts)
    return SpreadEventSeries.from_records(
        (t, pre, post, k) for t, (pre, post, k) in enumerate(zip(pres, posts, kinds))
    )


class TestSeriesValidation:
    def test_limit_must_shrink(self):
        with pytest.raises(DomainError):
            SpreadEventSeries.from_records([(0, 3, 3, L)])

    def test_market_must_widen(self):
        with pytest.raises(DomainError):
            SpreadEventSeries.from_records([(0, 3, 2, M)])

    def test_t_strictly_increasing(self):
        with pytest.raises(DomainError):
            SpreadEventSeries.from_records([(0, 3, 2, L), (0, 2, 3, M)])

    def test_spreads_positive(self):
        with pytest.raises(DomainError):
            SpreadEventSeries.from_records([(0, 0, 1, U)])

    def test_unknown_unconstrained(self):
        series = SpreadEventSeries.from_records([(0, 3, 3, U), (5, 3, 9, U)])
        assert len(series) == 2


class TestOddFraction:
    def test_counting(self):
        assert odd_fraction(series_from_posts([1, 2, 3])) == pytest.approx(2 / 3)

    def test_all_even(self):
        assert odd_fraction(series_from_posts([2, 4, 2])) == 0.0

    def test_empty_raises(self):
        with pytest.raises(EmptySeries):
            odd_fraction(SpreadEventSeries.from_records([]))


class TestConditionalParity:
    def test_forced_transition(self):
        series = SpreadEventSeries.from_records([(t, 2, 1, L) for t in range(10)])
        result = conditional_parity_frequency(series)
        assert result.frequency(2, "odd") == 1.0
        assert result.cells[2].count == 10
        assert result.cells[2].low_statistics  # 10 < default 50

    def test_restricts_to_spread_reductions(self):
        records = [(0, 4, 3, L), (1, 3, 6, M), (2, 6, 4, L), (3, 4, 4, U)]
        result = conditional_parity_frequency(SpreadEventSeries.from_records(records))
        assert set(result.cells) == {4, 6}
        assert result.frequency(4, "odd") == 1.0
        assert result.frequency(6, "even") == 1.0

    def test_min_count_flag(self):
        records = [(t, 3, 2, L) for t in range(60)] + [(100, 5, 4, L)]
        result = conditional_parity_frequency(SpreadEventSeries.from_records(records))
        assert not result.cells[3].low_statistics
        assert result.cells[5].low_statistics


class TestDeltaSDistribution:
    def test_counting(self):
        records = [(0, 4, 3, L), (1, 4, 3, L), (2, 4, 2, L), (3, 4, 1, L)]
        result = delta_s_distribution(SpreadEventSeries.from_records(records), 4)
        assert result.frequencies == {1: 0.5, 2: 0.25, 3: 0.25}
        assert result.n_events == 4

    def test_normalization(self):
        records = [(t, 6, 6 - 1 - (t % 5), L) for t in range(100)]
        result = delta_s_distribution(SpreadEventSeries.from_records(records), 6)
        assert sum(result.frequencies.values()) == pytest.approx(1.0)

    def test_missing_spread(self):
        series = SpreadEventSeries.from_records([(0, 4, 3, L)])
        with pytest.raises(NoSuchSpread):
            delta_s_distribution(series, 7)


class TestAlphaEstimate:
    def test_counting(self):
        records = [(0, 4, 3, L), (1, 4, 3, L), (2, 4, 2, L), (3, 4, 3, L)]
        result = alpha_estimate(SpreadEventSeries.from_records(records))
        assert result.by_spread[4] == (4, 0.75)
        assert result.weighted_average == 0.75

    def test_spread_2_excluded(self):
        records = [(0, 2, 1, L), (1, 3, 2, L)]
        result = alpha_estimate(SpreadEventSeries.from_records(records))
        assert 2 not in result.by_spread
        assert result.by_spread[3] == (1, 1.0)

    def test_weighting_by_counts(self):
        records = [(t, 3, 2, L) for t in range(3)] + [(10, 5, 2, L)]
        result = alpha_estimate(SpreadEventSeries.from_records(records))
        assert result.weighted_average == pytest.approx(3 / 4)


class TestAcfAbsReturns:
    def test_white_noise_uncorrelated(self, rng):
        mids = np.cumsum(rng.integers(-2, 3, size=50_000))
        result = acf_abs_returns(mids, max_lag=20)
        # per-lag 3 sigma is too tight across 20 lags; 4 sigma family bound
        assert np.all(np.abs(result.values) < 4 / np.sqrt(50_000))
        assert np.isnan(result.decay_constant)

    def test_known_exponential_decay_recovered(self, rng):
        # |returns| follow an AR(1) with phi = 0.95 whose ACF is phi^lag,
        # so the decay constant is -1 / ln(phi) ~ 19.5
        phi = 0.95
        n = 400_000
        magnitude = np.empty(n)
        magnitude[0] = 1.0
        noise = rng.exponential(1.0, n)
        for t in range(1, n):
            magnitude[t] = phi * magnitude[t - 1] + noise[t]
        signs = rng.choice([-1.0, 1.0], size=n)
        mids = np.concatenate([[0.0], np.cumsum(magnitude * signs)])
        result = acf_abs_returns(mids, max_lag=120, fit_window=(2, 80))
        expected = -1.0 / np.log(phi)
        assert result.decay_constant == pytest.approx(expected, rel=0.2)

    def test_constant_series_raises(self):
        with pytest.raises(ZeroVariance):
            acf_abs_returns(np.arange(10_000), max_lag=10)

    def test_too_short_raises(self):
        with pytest.raises(SeriesTooShort):
            acf_abs_returns(np.arange(100) % 7, max_lag=10)

    def test_bad_fit_window(self, rng):
        mids = np.cumsum(rng.integers(-2, 3, size=5_000))
        with pytest.raises(DomainError):
            acf_abs_returns(mids, max_lag=10, fit_window=(5, 50))


class TestSpreadRelaxation:
    def test_hand_computed_five_point_series(self):
        series = series_from_posts([2, 4, 3, 3, 2])
        curve = spread_relaxation(series, delta=2, max_lag=1)
        assert curve.n_conditioning == 1
        assert curve.mean_spread == pytest.approx(2.8)
        assert curve.values[0] == pytest.approx(1.2)
        assert curve.values[1] == pytest.approx(0.2)
        assert list(curve.counts) == [1, 1]

    def test_accepts_plain_array(self):
        curve = spread_relaxation(np.array([2, 4, 3, 3, 2]), delta=2, max_lag=1)
        assert curve.values[0] == pytest.approx(1.2)

    def test_counts_shrink_at_series_end(self):
        # jumps of +2 land at indices 1 and 3 of [1,3,1,3,1]
        curve = spread_relaxation(np.array([1, 3, 1, 3, 1]), delta=2, max_lag=4)
        assert curve.n_conditioning == 2
        assert list(curve.counts) == [2, 2, 1, 1, 0]
        assert np.isnan(curve.values[4])

    def test_overlapping_windows_all_contribute(self):
        s = np.array([1, 2, 3, 4, 5])
        curve = spread_relaxation(s, delta=1, max_lag=0)
        assert curve.n_conditioning == 4
        assert curve.values[0] == pytest.approx(np.mean([2, 3, 4, 5]) - 3.0)

    def test_no_conditioning_events(self):
        with pytest.raises(NoConditioningEvents):
            spread_relaxation(np.array([1, 1, 1, 1]), delta=2, max_lag=3)

    def test_zero_delta_rejected(self):
        with pytest.raises(DomainError):
            spread_relaxation(np.array([1, 2, 1]), delta=0, max_lag=3)

    def test_negative_delta(self):
        curve = spread_relaxation(np.array([4, 2, 2, 4, 2]), delta=-2, max_lag=1)
        assert curve.n_conditioning == 2
        assert curve.values[0] == pytest.approx(2 - 2.8)


class TestReindexingInvariance:
    def test_estimators_depend_only_on_order(self, rng):
        posts = [3, 2, 4, 3, 5, 4, 2, 3, 2, 4]
        pres = [posts[0]] + posts[:-1]
        kinds = [
            L if post < pre else (M if post > pre else U)
            for pre, post in zip(pres, posts)
        ]
        base = SpreadEventSeries.from_records(
            list(zip(range(10), pres, posts, kinds))
        )
        gaps = np.cumsum(rng.integers(1, 50, size=10))
        shifted = SpreadEventSeries.from_records(
            list(zip(gaps.tolist(), pres, posts, kinds))
        )
        assert odd_fraction(base) == odd_fraction(shifted)
        a = conditional_parity_frequency(base)
        b = conditional_parity_frequency(shifted)
        assert a.cells == b.cells
        ra = spread_relaxation(base, delta=1, max_lag=3)
        rb = spread_relaxation(shifted, delta=1, max_lag=3)
        assert np.allclose(ra.values, rb.values, equal_nan=True)
