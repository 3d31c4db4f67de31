from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import strategies as st

from xmatch.orders import OrderBook, ask, bid

ACCEPTANCE_LINES: list[str] = []


def make_book(bids=(), asks=()) -> OrderBook:
    """Book from ``(price, qty)`` pairs; timestamps follow list order, ask ids start at 1001."""
    return OrderBook(
        [bid(i, i, p, q) for i, (p, q) in enumerate(bids, 1)],
        [ask(1000 + i, i, p, q) for i, (p, q) in enumerate(asks, 1)],
    )


def random_book(rng: random.Random, max_orders: int, max_price: int, max_qty: int, min_price: int = 1) -> OrderBook:
    n = rng.randint(0, max_orders)
    sides = [rng.random() < 0.5 for _ in range(n)]
    bids = [(rng.randint(min_price, max_price), rng.randint(1, max_qty)) for s in sides if s]
    asks = [(rng.randint(min_price, max_price), rng.randint(1, max_qty)) for s in sides if not s]
    return make_book(bids, asks)


def exhaustive_books(max_side: int = 3, prices=(1, 2, 3), qtys=(1, 2)):
    choices = [(p, q) for p in prices for q in qtys]
    seqs = [s for k in range(max_side + 1) for s in itertools.product(choices, repeat=k)]
    for b in seqs:
        for a in seqs:
            yield make_book(b, a)


order_lists = st.lists(st.tuples(st.integers(0, 12), st.integers(1, 4)), max_size=12)


@st.composite
def books(draw, max_orders: int = 12) -> OrderBook:
    side = st.lists(st.tuples(st.integers(0, 12), st.integers(1, 4)), max_size=max_orders)
    return make_book(draw(side), draw(side))


def brute_matchings(book: OrderBook, price_filter=None):
    """Every matching over the unit-expanded book, as tuples of ``(bid_id, ask_id)`` unit pairs.

    ``price_filter(b, a)`` optionally restricts which pairs may trade.
    """
    bunits = [w for w in book.bids for _ in range(w.qty)]
    aunits = [w for w in book.asks for _ in range(w.qty)]

    def rec(i, used):
        if i == len(bunits):
            yield ()
            return
        yield from rec(i + 1, used)
        b = bunits[i]
        for j, a in enumerate(aunits):
            if j in used or b.price < a.price:
                continue
            if price_filter is not None and not price_filter(b, a):
                continue
            for rest in rec(i + 1, used | {j}):
                yield ((b.id, a.id),) + rest

    yield from rec(0, frozenset())


def brute_max_volume(book: OrderBook) -> int:
    return max(len(m) for m in brute_matchings(book))


def brute_uniform_volume(book: OrderBook) -> int:
    prices = [w.price for w in book.orders()]
    if not prices:
        return 0
    best = 0
    for p in range(min(prices), max(prices) + 1):
        best = max(best, max(len(m) for m in brute_matchings(book, lambda b, a: b.price >= p >= a.price)))
    return best


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return random.Random(20240607)
