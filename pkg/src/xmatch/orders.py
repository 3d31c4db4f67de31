"""Order-book domain types, price-time priority and volume accounting."""

from __future__ import annotations

import enum
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from operator import attrgetter
from typing import NamedTuple, Union

# Extended prices: real orders carry naturals, dummy orders carry one of the
# two infinities. Python compares ints against float infinities exactly.
NEG_INF: float = -math.inf
POS_INF: float = math.inf

Price = Union[int, float]


class OrderBookError(ValueError):
    """Raised when an order or book violates its invariants."""


class SideMismatchError(ValueError):
    pass


class NotFoundError(LookupError):
    pass


class EngineInvariantError(AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""


_ID = attrgetter("id")
_TIMESTAMP = attrgetter("timestamp")
_QTY = attrgetter("qty")


def is_sentinel(price: Price) -> bool:
    return price == NEG_INF or price == POS_INF


class Side(str, enum.Enum):
    BID = "B"
    ASK = "A"


class _OrderFields(NamedTuple):
    id: int
    timestamp: int
    side: Side
    price: Price
    qty: int
    is_dummy: bool = False


class Order(_OrderFields):
    """One bid or ask. Immutable; books hold millions, hence a named tuple."""

    __slots__ = ()

    def __new__(cls, id: int, timestamp: int, side: Side, price: Price, qty: int, is_dummy: bool = False):
        if qty < 1:
            raise OrderBookError(f"order {id}: qty must be >= 1, got {qty}")
        if is_dummy:
            if not is_sentinel(price):
                raise OrderBookError(f"order {id}: dummy orders must carry a sentinel price")
        elif type(price) is not int or price < 0:
            if is_sentinel(price):
                raise OrderBookError(f"order {id}: sentinel prices are reserved for dummy orders")
            raise OrderBookError(f"order {id}: price must be a natural, got {price!r}")
        return tuple.__new__(cls, (id, timestamp, side, price, qty, is_dummy))


def bid(id: int, timestamp: int, price: Price, qty: int) -> Order:
    return Order(id, timestamp, Side.BID, price, qty)


def ask(id: int, timestamp: int, price: Price, qty: int) -> Order:
    return Order(id, timestamp, Side.ASK, price, qty)


def priority_key(w: Order) -> tuple[Price, int]:
    """Sort key under which ascending order is decreasing competitiveness."""
    if w.side is Side.BID:
        return (-w.price, w.timestamp)
    return (w.price, w.timestamp)


def more_competitive(w1: Order, w2: Order) -> bool:
    """True iff ``w1`` strictly beats ``w2`` under price-time priority."""
    if w1.side is not w2.side:
        raise SideMismatchError(f"cannot compare {w1.side.name} {w1.id} with {w2.side.name} {w2.id}")
    return priority_key(w1) < priority_key(w2)


def tradable(b: Order, a: Order) -> bool:
    return b.price >= a.price


def sort_by_priority(orders: Iterable[Order]) -> list[Order]:
    return sorted(orders, key=priority_key)


@dataclass(frozen=True, slots=True, init=False)
class OrderBook:
    bids: tuple[Order, ...]
    asks: tuple[Order, ...]

    def __init__(self, bids: Iterable[Order] = (), asks: Iterable[Order] = (), *, _trusted: bool = False) -> None:
        object.__setattr__(self, "bids", tuple(bids))
        object.__setattr__(self, "asks", tuple(asks))
        if not _trusted:
            self._validate()

    def _validate(self) -> None:
        for side, orders in ((Side.BID, self.bids), (Side.ASK, self.asks)):
            for w in orders:
                if w.side is not side:
                    raise OrderBookError(f"order {w.id} is a {w.side.name} listed among {side.name}s")
            if len(set(map(_TIMESTAMP, orders))) != len(orders):
                dup = [t for t, c in Counter(w.timestamp for w in orders).items() if c > 1]
                raise OrderBookError(f"duplicate {side.name.lower()} timestamps: {sorted(dup)[:10]}")
        n = len(self.bids) + len(self.asks)
        if len(set(map(_ID, self.bids)).union(map(_ID, self.asks))) != n:
            ids = Counter(w.id for w in self.bids + self.asks)
            dup = sorted(i for i, c in ids.items() if c > 1)
            raise OrderBookError(f"duplicate order ids: {dup[:10]}")

    def __len__(self) -> int:
        return len(self.bids) + len(self.asks)

    def orders(self) -> tuple[Order, ...]:
        return self.bids + self.asks


class _TransactionFields(NamedTuple):
    bid_id: int
    ask_id: int
    qty: int
    price: Price


class Transaction(_TransactionFields):
    __slots__ = ()

    def __new__(cls, bid_id: int, ask_id: int, qty: int, price: Price):
        if qty < 1:
            raise EngineInvariantError(f"transaction {bid_id}/{ask_id} has qty {qty}")
        return tuple.__new__(cls, (bid_id, ask_id, qty, price))


@dataclass(frozen=True, slots=True)
class Matching:
    transactions: tuple[Transaction, ...] = ()

    def __len__(self) -> int:
        return len(self.transactions)

    def __iter__(self):
        return iter(self.transactions)

    @property
    def volume(self) -> int:
        return sum(map(_QTY, self.transactions))

    def traded(self) -> tuple[dict[int, int], dict[int, int]]:
        """Per-order traded quantity, as ``(bid_id -> qty, ask_id -> qty)``."""
        bids: dict[int, int] = {}
        asks: dict[int, int] = {}
        for t in self.transactions:
            bids[t.bid_id] = bids.get(t.bid_id, 0) + t.qty
            asks[t.ask_id] = asks.get(t.ask_id, 0) + t.qty
        return bids, asks


def vol(items: Iterable[Order] | Matching) -> int:
    """Total quantity of an order collection, or total traded volume of a matching."""
    if isinstance(items, Matching):
        return items.volume
    return sum(map(_QTY, items))


def qty_traded(w: Order, m: Matching) -> int:
    if w.side is Side.BID:
        return sum(t.qty for t in m.transactions if t.bid_id == w.id)
    return sum(t.qty for t in m.transactions if t.ask_id == w.id)


def _check_member(omega: Sequence[Order], w: Order) -> None:
    if not any(x is w or x == w for x in omega):
        raise NotFoundError(f"order {w.id} is not in the given collection")


def split(omega: Sequence[Order], w: Order) -> tuple[list[Order], list[Order]]:
    """Partition ``omega`` into orders at least as competitive as ``w`` and the rest."""
    _check_member(omega, w)
    pivot = priority_key(w)
    ge: list[Order] = []
    lt: list[Order] = []
    for x in omega:
        (ge if priority_key(x) <= pivot else lt).append(x)
    return ge, lt


def range_of(omega: Sequence[Order], w: Order) -> range:
    """Cumulative-quantity positions ``w`` occupies in ``omega``'s priority order."""
    ge, _ = split(omega, w)
    hi = vol(ge)
    return range(hi - w.qty + 1, hi + 1)


@dataclass(frozen=True, slots=True)
class DummyInfo:
    """What :func:`pad_with_dummy` added; ``order`` is None when nothing was."""

    order: Order | None = None

    @property
    def id(self) -> int | None:
        return None if self.order is None else self.order.id


def pad_with_dummy(book: OrderBook) -> tuple[OrderBook, DummyInfo]:
    """Equalise side volumes with one untradable dummy order."""
    vb, va = vol(book.bids), vol(book.asks)
    if vb == va:
        return book, DummyInfo()
    orders = book.orders()
    dummy_id = max(map(_ID, orders)) + 1
    ts = max(map(_TIMESTAMP, orders)) + 1
    # fresh id and timestamp keep the book valid without re-checking it
    if va < vb:
        d = Order(dummy_id, ts, Side.ASK, POS_INF, vb - va, is_dummy=True)
        return OrderBook(book.bids, book.asks + (d,), _trusted=True), DummyInfo(d)
    d = Order(dummy_id, ts, Side.BID, NEG_INF, va - vb, is_dummy=True)
    return OrderBook(book.bids + (d,), book.asks, _trusted=True), DummyInfo(d)


def strip_dummy(m: Matching, dummy: DummyInfo) -> Matching:
    if dummy.order is None:
        return m
    did = dummy.order.id
    if any(t.bid_id == did or t.ask_id == did for t in m.transactions):
        raise EngineInvariantError(f"dummy order {did} was traded")
    return m


def with_qty(w: Order, qty: int) -> Order:
    """Copy of ``w`` carrying ``qty`` units (a part of a split order)."""
    if qty < 1:
        raise EngineInvariantError(f"order {w.id}: part quantity {qty}")
    return w._replace(qty=qty)
