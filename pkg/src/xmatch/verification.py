"""Checkers, volume bounds and brute-force oracles for matchings."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from itertools import accumulate

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .engine import maximum_matching
from .orders import (
    Matching,
    Order,
    OrderBook,
    Price,
    bid,
    ask,
    is_sentinel,
    sort_by_priority,
    vol,
)

ORACLE_MAX_UNITS = 10_000


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass
class VerificationReport:
    check: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str) -> None:
        self.violations.append(Violation(kind, detail))

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "violations": [{"kind": v.kind, "detail": v.detail} for v in self.violations],
        }

    def __str__(self) -> str:
        if self.passed:
            return f"{self.check}: PASS"
        lines = [f"{self.check}: FAIL ({len(self.violations)} violations)"]
        lines += [f"  - {v}" for v in self.violations[:20]]
        if len(self.violations) > 20:
            lines.append(f"  ... {len(self.violations) - 20} more")
        return "\n".join(lines)


def check_valid(m: Matching, book: OrderBook) -> VerificationReport:
    report = VerificationReport("valid")
    bids = {w.id: w for w in book.bids}
    asks = {w.id: w for w in book.asks}
    traded_b, traded_a = m.traded()
    for t in m.transactions:
        b, a = bids.get(t.bid_id), asks.get(t.ask_id)
        if b is None:
            report.add("unknown-bid", f"transaction {t} references no bid {t.bid_id}")
        if a is None:
            report.add("unknown-ask", f"transaction {t} references no ask {t.ask_id}")
        if b is None or a is None:
            continue
        if b.price < a.price:
            report.add("not-tradable", f"bid {b.id} at {b.price} cannot trade with ask {a.id} at {a.price}")
        elif not a.price <= t.price <= b.price:
            report.add("price-out-of-range", f"transaction {t} priced outside [{a.price}, {b.price}]")
    for side, orders, traded in (("bid", bids, traded_b), ("ask", asks, traded_a)):
        for oid, q in traded.items():
            w = orders.get(oid)
            if w is not None and q > w.qty:
                report.add("over-traded", f"{side} {oid} traded {q} of {w.qty}")
    return report


def _check_side_fair(report: VerificationReport, orders: Sequence[Order], traded: dict[int, int], side: str) -> None:
    # walking in priority order, a short order may only be followed by untraded ones
    short: Order | None = None
    for w in sort_by_priority(orders):
        q = traded.get(w.id, 0)
        if short is not None and q >= 1:
            report.add(
                f"unfair-{side}",
                f"{side} {w.id} traded {q} while more competitive {side} {short.id} "
                f"traded {traded.get(short.id, 0)} of {short.qty}",
            )
        elif short is None and q < w.qty:
            short = w


def check_fair(m: Matching, book: OrderBook) -> VerificationReport:
    report = VerificationReport("fair")
    traded_b, traded_a = m.traded()
    _check_side_fair(report, book.bids, traded_b, "bid")
    _check_side_fair(report, book.asks, traded_a, "ask")
    return report


def check_uniform(m: Matching) -> VerificationReport:
    report = VerificationReport("uniform")
    prices = {t.price for t in m.transactions}
    if len(prices) > 1:
        report.add("multiple-prices", f"transaction prices {sorted(prices)[:10]}")
    return report


def demand_supply_bound(book: OrderBook, p: Price) -> int:
    """Upper bound on the volume of any matching over ``book`` from price ``p``.

    Bids strictly above ``p`` and asks strictly below it count in full;
    orders priced exactly at ``p`` count only on the thinner side.
    """
    if is_sentinel(p):
        raise ValueError("demand-supply bound needs a finite price")
    above = at_b = below = at_a = 0
    for w in book.bids:
        if w.price > p:
            above += w.qty
        elif w.price == p:
            at_b += w.qty
    for w in book.asks:
        if w.price < p:
            below += w.qty
        elif w.price == p:
            at_a += w.qty
    return above + below + min(at_b, at_a)


def _levels(orders: Sequence[Order]) -> tuple[list[Price], list[int]]:
    # sorted prices and prefix sums of quantity, cum[i] = Vol of the first i orders
    ranked = sorted(orders, key=lambda w: w.price)
    return [w.price for w in ranked], [0, *accumulate(w.qty for w in ranked)]


def demand_supply_bounds(book: OrderBook, prices: Iterable[Price]) -> list[int]:
    """:func:`demand_supply_bound` at many prices; sorts once, then bisects per price."""
    bp, bc = _levels(book.bids)
    ap, ac = _levels(book.asks)
    out = []
    for p in prices:
        if is_sentinel(p):
            raise ValueError("demand-supply bound needs a finite price")
        bl, br = bisect_left(bp, p), bisect_right(bp, p)
        al, ar = bisect_left(ap, p), bisect_right(ap, p)
        above = bc[-1] - bc[br]
        out.append(above + ac[al] + min(bc[br] - bc[bl], ac[ar] - ac[al]))
    return out


def limit_prices(book: OrderBook) -> list[Price]:
    return sorted({w.price for w in book.orders() if not w.is_dummy})


def certified_upper_bound(book: OrderBook) -> tuple[int, Price | None]:
    """Smallest demand-supply bound over the book's limit prices, and where it is attained."""
    prices = limit_prices(book)
    if not prices:
        return 0, None
    bounds = demand_supply_bounds(book, prices)
    i = bounds.index(min(bounds))
    return bounds[i], prices[i]


def oracle_max_volume(book: OrderBook) -> int:
    """Maximum matching volume by unit expansion and bipartite matching."""
    nb, na = vol(book.bids), vol(book.asks)
    if nb + na > ORACLE_MAX_UNITS:
        raise OverflowError(f"oracle limited to {ORACLE_MAX_UNITS} units, book has {nb + na}")
    if not nb or not na:
        return 0
    bid_prices = np.repeat([w.price for w in book.bids], [w.qty for w in book.bids])
    ask_prices = np.repeat([w.price for w in book.asks], [w.qty for w in book.asks])
    graph = csr_matrix(bid_prices[:, None] >= ask_prices[None, :])
    match = maximum_bipartite_matching(graph, perm_type="column")
    return int(np.count_nonzero(match >= 0))


def oracle_uniform_volume(book: OrderBook) -> int:
    """Best uniform-price volume: at price ``p`` only bids >= p and asks <= p can trade."""
    best = 0
    for p in limit_prices(book):
        demand = sum(w.qty for w in book.bids if w.price >= p)
        supply = sum(w.qty for w in book.asks if w.price <= p)
        best = max(best, min(demand, supply))
    return best


def distinctness_books(xs: Sequence[int]) -> tuple[OrderBook, OrderBook]:
    """The two instances whose maximum volumes decide distinctness of ``xs``.

    Orders priced ``1..n`` play bids in the first book and asks in the
    second; orders priced ``xs`` take the other side. Every quantity is 1.
    """
    n = len(xs)
    if n < 1:
        raise ValueError("element distinctness needs at least one element")
    for x in xs:
        if not isinstance(x, (int, np.integer)) or not 1 <= x <= n:
            raise ValueError(f"element {x!r} outside [1, {n}]")
    first = OrderBook(
        [bid(i, i, i, 1) for i in range(1, n + 1)],
        [ask(n + i, i, int(x), 1) for i, x in enumerate(xs, 1)],
    )
    second = OrderBook(
        [bid(n + i, i, int(x), 1) for i, x in enumerate(xs, 1)],
        [ask(i, i, i, 1) for i in range(1, n + 1)],
    )
    return first, second


def element_distinctness(xs: Sequence[int]) -> bool:
    """Decide whether ``xs`` (values in ``[1, len(xs)]``) has no repeats, via maximum matching."""
    first, second = distinctness_books(xs)
    n = len(xs)
    return maximum_matching(first).volume == n and maximum_matching(second).volume == n
