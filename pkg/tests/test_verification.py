import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import books, brute_max_volume, make_book, random_book
from xmatch.engine import max_fair_matching, maximum_matching, um_star, uniform_star
from xmatch.orders import NEG_INF, POS_INF, Matching, Transaction, more_competitive
from xmatch.verification import (
    ORACLE_MAX_UNITS,
    VerificationReport,
    certified_upper_bound,
    check_fair,
    check_uniform,
    check_valid,
    demand_supply_bound,
    demand_supply_bounds,
    distinctness_books,
    element_distinctness,
    limit_prices,
    oracle_max_volume,
    oracle_uniform_volume,
)


def tx(bid_id, ask_id, qty, price):
    return Transaction(bid_id, ask_id, qty, price)


class TestCheckValid:
    def test_empty(self):
        assert check_valid(Matching(), make_book([(1, 1)], [(9, 1)])).passed

    def test_over_traded(self):
        book = make_book([(9, 1)], [(5, 3)])
        r = check_valid(Matching((tx(1, 1001, 2, 6),)), book)
        assert [v.kind for v in r.violations] == ["over-traded"]

    def test_not_tradable(self):
        book = make_book([(3, 1)], [(9, 1)])
        r = check_valid(Matching((tx(1, 1001, 1, 5),)), book)
        assert [v.kind for v in r.violations] == ["not-tradable"]

    def test_price_out_of_range(self):
        book = make_book([(9, 1)], [(5, 1)])
        r = check_valid(Matching((tx(1, 1001, 1, 10),)), book)
        assert [v.kind for v in r.violations] == ["price-out-of-range"]

    def test_unknown_ids(self):
        book = make_book([(9, 1)], [(5, 1)])
        r = check_valid(Matching((tx(1001, 1, 1, 6),)), book)
        assert {v.kind for v in r.violations} == {"unknown-bid", "unknown-ask"}

    def test_split_over_two_transactions(self):
        book = make_book([(9, 2)], [(5, 1), (6, 1)])
        assert check_valid(Matching((tx(1, 1001, 1, 5), tx(1, 1002, 1, 6))), book).passed
        r = check_valid(Matching((tx(1, 1001, 1, 5), tx(1, 1001, 1, 6))), book)
        assert not r.passed

    def test_report_rendering(self):
        r = VerificationReport("valid")
        assert str(r) == "valid: PASS"
        r.add("over-traded", "bid 1 traded 2 of 1")
        assert "FAIL" in str(r) and r.to_dict()["passed"] is False


class TestCheckFair:
    def test_saturated(self):
        book = make_book([(9, 1), (8, 2)], [(1, 3)])
        m = Matching((tx(1, 1001, 1, 5), tx(2, 1001, 2, 5)))
        assert check_fair(m, book).passed

    def test_skipped_bid(self):
        # bid 1 is more competitive (earlier timestamp) but untouched
        book = make_book([(9, 1), (9, 1)], [(1, 1)])
        r = check_fair(Matching((tx(2, 1001, 1, 5),)), book)
        assert [v.kind for v in r.violations] == ["unfair-bid"]

    def test_partially_traded_leader(self):
        book = make_book([(9, 2), (8, 1)], [(1, 2)])
        r = check_fair(Matching((tx(1, 1001, 1, 5), tx(2, 1001, 1, 5))), book)
        assert not r.passed

    def test_unfair_ask(self):
        book = make_book([(9, 1)], [(2, 1), (1, 1)])
        assert [v.kind for v in check_fair(Matching((tx(1, 1001, 1, 5),)), book).violations] == ["unfair-ask"]

    @given(books())
    def test_matches_pairwise_definition(self, book):
        m = maximum_matching(book)
        tb, ta = m.traded()
        expected = True
        for side, traded in ((book.bids, tb), (book.asks, ta)):
            for w1, w2 in itertools.permutations(side, 2):
                if more_competitive(w1, w2) and traded.get(w2.id, 0) >= 1 and traded.get(w1.id, 0) != w1.qty:
                    expected = False
        assert check_fair(m, book).passed == expected


class TestCheckUniform:
    def test_examples(self):
        assert check_uniform(Matching()).passed
        assert check_uniform(Matching((tx(1, 2, 1, 7),) * 3)).passed
        assert not check_uniform(Matching((tx(1, 2, 1, 7), tx(1, 3, 1, 8)))).passed


class TestDemandSupplyBound:
    def test_formula(self):
        book = make_book([(10, 2)], [(5, 1)])
        assert demand_supply_bound(book, 7) == 3
        assert demand_supply_bound(book, 10) == 1
        assert brute_max_volume(book) == 1

    def test_empty(self):
        assert demand_supply_bound(make_book(), 4) == 0

    @pytest.mark.parametrize("p", [NEG_INF, POS_INF])
    def test_sentinel(self, p):
        with pytest.raises(ValueError):
            demand_supply_bound(make_book(), p)

    def test_certified(self):
        book = make_book([(10, 1), (6, 1)], [(5, 1), (7, 1)])
        assert [demand_supply_bound(book, p) for p in (5, 6, 7, 10)] == [2, 2, 2, 2]
        assert certified_upper_bound(book)[0] == 2
        assert certified_upper_bound(make_book()) == (0, None)
        assert certified_upper_bound(make_book([(10, 2)], [(5, 1)])) == (1, 10)

    @given(books(), st.lists(st.integers(0, 14), max_size=16))
    def test_batched_agrees(self, book, ps):
        assert demand_supply_bounds(book, ps) == [demand_supply_bound(book, p) for p in ps]

    def test_batched_big_prices(self):
        book = make_book([(2**70, 3), (5, 1)], [(2**70, 1), (1, 2)])
        ps = [0, 1, 5, 2**70, 2**71]
        assert demand_supply_bounds(book, ps) == [demand_supply_bound(book, p) for p in ps]
        with pytest.raises(ValueError):
            demand_supply_bounds(book, [POS_INF])

    @given(books(), st.lists(st.integers(0, 14), max_size=16))
    def test_bounds_every_matching(self, book, extra):
        volumes = [fn(book).volume for fn in (maximum_matching, max_fair_matching, um_star, uniform_star)]
        for p in limit_prices(book) + extra:
            assert max(volumes) <= demand_supply_bound(book, p)

    @given(books(), st.lists(st.integers(0, 14), max_size=16))
    def test_off_grid_prices_never_tighter(self, book, extra):
        best = certified_upper_bound(book)[0]
        if limit_prices(book):
            assert all(demand_supply_bound(book, p) >= best for p in extra)

    @given(books())
    def test_sandwich(self, book):
        assert oracle_max_volume(book) <= certified_upper_bound(book)[0] or not limit_prices(book)


class TestOracles:
    def test_max_volume_examples(self):
        assert oracle_max_volume(make_book([(10, 1), (6, 1)], [(5, 1), (7, 1)])) == 2
        assert oracle_max_volume(make_book([(1, 2)], [(3, 2)])) == 0
        assert oracle_max_volume(make_book([(5, 3)], [(5, 2)])) == 2

    def test_uniform_volume_examples(self):
        assert oracle_uniform_volume(make_book([(10, 1), (6, 1)], [(5, 1), (7, 1)])) == 1
        assert oracle_uniform_volume(make_book()) == 0
        assert oracle_uniform_volume(make_book([(5, 3)], [(5, 2)])) == 2

    def test_guard(self):
        half = ORACLE_MAX_UNITS // 2
        with pytest.raises(OverflowError):
            oracle_max_volume(make_book([(5, half)], [(5, half + 1)]))

    def test_max_oracle_against_enumeration(self):
        rng = random.Random(17)
        for _ in range(300):
            book = random_book(rng, 6, 5, 2)
            if sum(w.qty for w in book.orders()) <= 9:
                assert oracle_max_volume(book) == brute_max_volume(book)


def duplicate_scan(xs):
    return len(set(xs)) == len(xs)


class TestElementDistinctness:
    @pytest.mark.parametrize("xs,expected", [((1, 2, 3), True), ((2, 2, 3), False), ((1,), True)])
    def test_examples(self, xs, expected):
        assert element_distinctness(xs) is expected

    def test_bounds_on_repeats(self):
        first, _ = distinctness_books((2, 2, 3))
        assert maximum_matching(first).volume <= 2

    @pytest.mark.parametrize("xs", [(), (0, 1), (1, 3), (1.5,)])
    def test_domain(self, xs):
        with pytest.raises(ValueError):
            element_distinctness(xs)

    def test_exhaustive_small(self):
        for n in range(1, 6):
            for xs in itertools.product(range(1, n + 1), repeat=n):
                assert element_distinctness(xs) == duplicate_scan(xs)

    @given(st.integers(1, 40).flatmap(lambda n: st.lists(st.integers(1, n), min_size=n, max_size=n)))
    def test_random(self, xs):
        assert element_distinctness(xs) == duplicate_scan(xs)

    def test_permutations_are_distinct(self):
        rng = random.Random(1)
        xs = list(range(1, 101))
        rng.shuffle(xs)
        assert element_distinctness(xs)
