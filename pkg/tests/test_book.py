import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spreadlab.book import BookSide, OrderBook, Side
from spreadlab.errors import CrossingOrder, DomainError, EmptySide


def make_book(bids, asks):
    return OrderBook(bids=bids, asks=asks)


class TestSpread:
    def test_adjacent_quotes(self):
        assert make_book({100: 1}, {101: 1}).spread() == 1

    def test_uses_best_quotes(self):
        book = make_book({98: 1, 100: 1}, {103: 1, 105: 1})
        assert book.spread() == 3

    def test_empty_side_raises(self):
        book = make_book({100: 1}, None)
        with pytest.raises(EmptySide):
            book.spread()


class TestGranularity:
    def test_single_quote(self):
        side = BookSide(Side.BUY, {100: 1})
        assert side.granularity() == 1.0

    def test_sparse_side(self):
        side = BookSide(Side.BUY, {100: 1, 98: 1, 96: 1})
        assert side.granularity() == pytest.approx(0.6)

    def test_dense_side(self):
        side = BookSide(Side.BUY, {100: 2, 99: 2})
        assert side.granularity() == pytest.approx(2.0)

    def test_empty_raises(self):
        with pytest.raises(EmptySide):
            BookSide(Side.SELL).granularity()


class TestMarketOrder:
    def test_level_exhausted_widens_spread(self):
        book = make_book({100: 1}, {101: 1, 103: 1})
        price = book.apply_market_order(Side.BUY)
        assert price == 101
        assert book.asks.volumes() == {103: 1}
        assert book.spread() == 3

    def test_level_survives(self):
        book = make_book({100: 1}, {101: 2})
        book.apply_market_order(Side.BUY)
        assert book.asks.volumes() == {101: 1}
        assert book.spread() == 1

    def test_empty_opposite_side(self):
        book = make_book(None, {101: 1})
        with pytest.raises(EmptySide):
            book.apply_market_order(Side.SELL)


class TestLimitOrder:
    def test_interior_sell_narrows_spread(self):
        book = make_book({100: 1}, {105: 1})
        book.apply_limit_order(Side.SELL, 102)
        assert book.best_ask == 102
        assert book.spread() == 2

    def test_behind_best_grows_depth_only(self):
        book = make_book({100: 1}, {105: 1})
        book.apply_limit_order(Side.SELL, 106)
        assert book.spread() == 5
        assert book.asks.total_volume == 2

    def test_crossing_buy_rejected(self):
        book = make_book({100: 1}, {105: 1})
        with pytest.raises(CrossingOrder):
            book.apply_limit_order(Side.BUY, 105)

    def test_crossing_sell_rejected(self):
        book = make_book({100: 1}, {105: 1})
        with pytest.raises(CrossingOrder):
            book.apply_limit_order(Side.SELL, 100)

    def test_at_best_keeps_spread(self):
        book = make_book({100: 1}, {105: 1})
        book.apply_limit_order(Side.SELL, 105)
        assert book.spread() == 5
        assert book.asks.volume_at(105) == 2

    def test_nonpositive_price_rejected(self):
        book = make_book({100: 1}, {105: 1})
        with pytest.raises(DomainError):
            book.apply_limit_order(Side.BUY, 0)


ops = st.lists(
    st.tuples(
        st.sampled_from(["limit", "market"]),
        st.sampled_from([Side.BUY, Side.SELL]),
        st.integers(min_value=-8, max_value=8),
    ),
    max_size=60,
)


@settings(max_examples=200, deadline=None)
@given(ops)
def test_book_invariants_under_random_ops(op_seq):
    book = make_book({98: 1, 99: 1, 100: 1}, {101: 1, 102: 1, 103: 1})
    for kind, side, offset in op_seq:
        volume = book.total_volume()
        if kind == "market":
            if book.side(side.opposite).total_volume == 0:
                continue
            book.apply_market_order(side)
            assert book.total_volume() == volume - 1
        else:
            own = book.side(side)
            other = book.side(side.opposite)
            if own.is_empty and other.is_empty:
                continue
            anchor = (other if own.is_empty else own).best
            price = anchor + offset
            spread_before = (
                book.spread()
                if (not book.bids.is_empty and not book.asks.is_empty)
                else None
            )
            try:
                book.apply_limit_order(side, price)
            except (CrossingOrder, DomainError):
                continue
            assert book.total_volume() == volume + 1
            if spread_before is not None:
                assert book.spread() <= spread_before
        if not book.bids.is_empty and not book.asks.is_empty:
            assert book.best_bid < book.best_ask
            assert book.spread() >= 1


def test_spread_invariant_under_depth_changes():
    book = make_book({100: 1}, {103: 1})
    s = book.spread()
    book.apply_limit_order(Side.BUY, 100)   # at best
    book.apply_limit_order(Side.BUY, 95)    # behind best
    book.apply_limit_order(Side.SELL, 103)  # at best
    book.apply_limit_order(Side.SELL, 110)  # behind best
    assert book.spread() == s


def test_eventkind_labels():
    from spreadlab.book import EventKind

    assert EventKind.from_label("limit") is EventKind.LIMIT
    assert EventKind.MARKET.label == "market"
    with pytest.raises(DomainError):
        EventKind.from_label("nonsense")
