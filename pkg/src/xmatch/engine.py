"""Matching algorithms for call auctions.

Uniform-price matching comes in two flavours that produce identical
per-order traded quantities: :func:`um_star` sorts both sides and matches
greedily, :func:`uniform_star` bisects both sides around medians and never
sorts. Dynamic-price matching is :func:`maximum_matching`, made fair by
:func:`make_fair`.
"""

from __future__ import annotations

from collections.abc import Sequence
from itertools import repeat
from operator import attrgetter

import numpy as np

from . import _kernel
from .orders import (
    DummyInfo,
    EngineInvariantError,
    Matching,
    Order,
    OrderBook,
    Side,
    Transaction,
    pad_with_dummy,
    priority_key,
    sort_by_priority,
    strip_dummy,
    vol,
    with_qty,
)
from .selection import select_kth, split_q

# books smaller than this go through the pure-Python path under backend="auto"
KERNEL_MIN_ORDERS = 64

Pair = tuple[Order, Order, int]


def _match_into(bids: Sequence[Order], asks: Sequence[Order], out: list[Pair]) -> None:
    i = j = 0
    nb, na = len(bids), len(asks)
    if not nb or not na:
        return
    b, a = bids[0], asks[0]
    bq, aq = b.qty, a.qty
    while True:
        if b.price < a.price:
            return
        q = bq if bq < aq else aq
        out.append((b, a, q))
        bq -= q
        aq -= q
        if not bq:
            i += 1
            if i == nb:
                return
            b = bids[i]
            bq = b.qty
        if not aq:
            j += 1
            if j == na:
                return
            a = asks[j]
            aq = a.qty


def _priced_at_ask(pairs: list[Pair]) -> list[Transaction]:
    return [Transaction(b.id, a.id, q, a.price) for b, a, q in pairs]


def match_greedy(bids: Sequence[Order], asks: Sequence[Order], m: Matching | None = None) -> Matching:
    """Pair the top bid with the top ask until they stop being tradable.

    Both lists must already be in priority order (most competitive first);
    when every bid is tradable with every ask any order works and the
    match is exhaustive. New transactions are appended after those of ``m``
    and priced at the ask's limit.
    """
    out: list[Pair] = []
    _match_into(bids, asks, out)
    prior = m.transactions if m is not None else ()
    return Matching(prior + tuple(_priced_at_ask(out)))


def _clearing_price(ask_prices, bid_prices):
    price, floor = max(ask_prices), min(bid_prices)
    if price > floor:
        raise EngineInvariantError(f"uniform price {price} exceeds the limit {floor} of a matched bid")
    return price


def assign_uniform_price(m: Matching, book: OrderBook) -> Matching:
    """Reprice every transaction at the highest limit among the matched asks."""
    if not m.transactions:
        return m
    ask_ids = {t.ask_id for t in m.transactions}
    bid_ids = {t.bid_id for t in m.transactions}
    price = _clearing_price(
        (w.price for w in book.asks if w.id in ask_ids),
        (w.price for w in book.bids if w.id in bid_ids),
    )
    return Matching(tuple(t._replace(price=price) for t in m.transactions))


def _uniform_from_pairs(pairs: list[Pair], dummy: DummyInfo) -> Matching:
    # same result as pricing at the ask, stripping the dummy, then
    # assign_uniform_price; done in one pass since books can be huge
    if not pairs:
        return Matching()
    price = _clearing_price((a.price for _, a, _ in pairs), (b.price for b, _, _ in pairs))
    m = Matching(tuple(Transaction(b.id, a.id, q, price) for b, a, q in pairs))
    return strip_dummy(m, dummy)


def um_star(book: OrderBook) -> Matching:
    """Maximum-volume fair uniform matching by sorting then greedy matching."""
    padded, dummy = pad_with_dummy(book)
    pairs: list[Pair] = []
    _match_into(sort_by_priority(padded.bids), sort_by_priority(padded.asks), pairs)
    return _uniform_from_pairs(pairs, dummy)


def _uniform_loop(bids: Sequence[Order], asks: Sequence[Order], out: list[Pair], on_bids: bool) -> None:
    B, A = list(bids), list(asks)
    vb = vol(B)
    if vb != vol(A):
        raise EngineInvariantError(f"sides carry unequal volume {vb} vs {vol(A)}")
    while B and A:
        if len(B) == 1 and len(A) == 1 and A[0].price > B[0].price:
            return
        if on_bids:
            b = select_kth(B, (len(B) + 1) // 2)
            key = priority_key(b)
            B_ge = [x for x in B if priority_key(x) <= key]
            B_lt = [x for x in B if priority_key(x) > key]
            q = vol(B_ge)
            a, A_ge, A_le = split_q(A, q)
            if a.price <= b.price:
                _match_into(B_ge, A_ge, out)
                B, A, vb = B_lt, A_le, vb - q
            else:
                B, A, vb = B_ge, A_ge, q
        else:
            a = select_kth(A, (len(A) + 1) // 2)
            key = priority_key(a)
            A_ge = [x for x in A if priority_key(x) <= key]
            A_lt = [x for x in A if priority_key(x) > key]
            q = vol(A_ge)
            b, B_ge, B_le = split_q(B, q)
            if a.price <= b.price:
                _match_into(B_ge, A_ge, out)
                B, A, vb = B_le, A_lt, vb - q
            else:
                B, A, vb = B_ge, A_ge, q
        if vol(A) != vb or vol(B) != vb:
            raise EngineInvariantError("split lost volume balance between sides")
        on_bids = not on_bids


def uniform_bid(bids: Sequence[Order], asks: Sequence[Order], m: Matching | None = None) -> Matching:
    """Run the bisection matcher starting with a split of the bids.

    ``bids`` and ``asks`` must carry equal volume; they need not be sorted.
    Transactions are priced at the ask's limit and appended after ``m``.
    """
    out: list[Pair] = []
    _uniform_loop(bids, asks, out, on_bids=True)
    prior = m.transactions if m is not None else ()
    return Matching(prior + tuple(_priced_at_ask(out)))


def uniform_ask(bids: Sequence[Order], asks: Sequence[Order], m: Matching | None = None) -> Matching:
    out: list[Pair] = []
    _uniform_loop(bids, asks, out, on_bids=False)
    prior = m.transactions if m is not None else ()
    return Matching(prior + tuple(_priced_at_ask(out)))


_ID = attrgetter("id")


def _uniform_kernel(padded: OrderBook, dummy: DummyInfo) -> Matching | None:
    """Kernel run of the bisection matcher, or None if the book does not encode."""
    try:
        B = _kernel.Side.from_orders(padded.bids, is_bid=True)
        A = _kernel.Side.from_orders(padded.asks, is_bid=False)
    except _kernel.NotEncodable:
        return None
    bp, ap, qty = _kernel.uniform(B, A)
    if not qty.size:
        return Matching()
    matched_b = _kernel.bid_code(B.key[bp])
    matched_a = _kernel.ask_code(A.key[ap])
    if dummy.order is not None:
        # dummies sit last on their side and carry the extreme codes
        last = B.size - 1 if dummy.order.side is Side.BID else A.size - 1
        hit = bp if dummy.order.side is Side.BID else ap
        if np.any(hit == last):
            raise EngineInvariantError(f"dummy order {dummy.order.id} was traded")
    price = _clearing_price([int(matched_a.max())], [int(matched_b.min())]) - 1
    bid_ids = np.fromiter(map(_ID, padded.bids), dtype=object, count=B.size)[bp].tolist()
    ask_ids = np.fromiter(map(_ID, padded.asks), dtype=object, count=A.size)[ap].tolist()
    return Matching(tuple(map(Transaction, bid_ids, ask_ids, qty.tolist(), repeat(price))))


def uniform_star(book: OrderBook, *, backend: str = "auto") -> Matching:
    """Maximum-volume fair uniform matching in worst-case linear time.

    ``backend`` is ``"kernel"`` (vectorised), ``"python"`` (reference) or
    ``"auto"``, which uses the kernel for books of at least
    ``KERNEL_MIN_ORDERS`` orders whose prices and timestamps it can encode.
    """
    if backend not in ("auto", "kernel", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    padded, dummy = pad_with_dummy(book)
    if backend == "kernel" or (backend == "auto" and len(padded) >= KERNEL_MIN_ORDERS):
        m = _uniform_kernel(padded, dummy)
        if m is not None:
            return m
        if backend == "kernel":
            raise ValueError("book prices or timestamps exceed the kernel's key range")
    pairs: list[Pair] = []
    _uniform_loop(padded.bids, padded.asks, pairs, on_bids=True)
    return _uniform_from_pairs(pairs, dummy)


def maximum_matching(book: OrderBook) -> Matching:
    """Maximum-volume matching with per-pair (dynamic) prices; not necessarily fair.

    Bids go highest price first, asks also highest price first (earlier
    timestamp first on ties). An ask the top bid cannot afford is dropped,
    since no remaining bid can afford it either.
    """
    bids = sort_by_priority(book.bids)
    asks = sorted(book.asks, key=lambda w: (-w.price, w.timestamp))
    out: list[Transaction] = []
    i = j = 0
    bq = bids[0].qty if bids else 0
    aq = asks[0].qty if asks else 0
    while i < len(bids) and j < len(asks):
        b, a = bids[i], asks[j]
        if b.price < a.price:
            j += 1
            if j < len(asks):
                aq = asks[j].qty
            continue
        q = min(bq, aq)
        out.append(Transaction(b.id, a.id, q, a.price))
        bq -= q
        aq -= q
        if not bq:
            i += 1
            if i < len(bids):
                bq = bids[i].qty
        if not aq:
            j += 1
            if j < len(asks):
                aq = asks[j].qty
    return Matching(tuple(out))


def _refill(slots: list[int], orders: list[Order]) -> list[tuple[int, int, int]]:
    """Deal ``orders`` in sequence over quantity ``slots``.

    Returns ``(qty, slot_index, order_index)`` pieces; totals must agree.
    """
    pieces: list[tuple[int, int, int]] = []
    k = 0
    left = orders[0].qty if orders else 0
    for u, q in enumerate(slots):
        while q:
            take = min(q, left)
            pieces.append((take, u, k))
            q -= take
            left -= take
            if not left:
                k += 1
                left = orders[k].qty if k < len(orders) else 0
    return pieces


def _coalesce(txs: list[Transaction]) -> list[Transaction]:
    out: list[Transaction] = []
    for t in txs:
        if out and (out[-1].bid_id, out[-1].ask_id, out[-1].price) == (t.bid_id, t.ask_id, t.price):
            last = out.pop()
            t = Transaction(t.bid_id, t.ask_id, last.qty + t.qty, t.price)
        out.append(t)
    return out


def make_fair(m: Matching, book: OrderBook) -> Matching:
    """Rewrite a valid matching into a fair one of the same volume.

    Two passes. The bid pass walks the transactions from the highest ask
    limit down and re-deals bids to them in priority order; the ask pass
    walks them from the lowest bid limit up and re-deals asks in priority
    order. Each new price is the old price clamped into the new pair's
    limits, so a uniform matching stays uniform.
    """
    from .verification import check_valid

    report = check_valid(m, book)
    if not report.passed:
        raise ValueError(f"make_fair needs a valid matching: {report.violations[0]}")
    if not m.transactions:
        return m
    bids = {w.id: w for w in book.bids}
    asks = {w.id: w for w in book.asks}
    volume = m.volume

    # bid pass
    txs = sorted(m.transactions, key=lambda t: (-asks[t.ask_id].price, asks[t.ask_id].timestamp))
    ranked = _prefix(sort_by_priority(book.bids), volume)
    new: list[Transaction] = []
    for q, u, k in _refill([t.qty for t in txs], ranked):
        t, b = txs[u], ranked[k]
        new.append(Transaction(b.id, t.ask_id, q, min(t.price, b.price)))
    txs = _coalesce(new)

    # ask pass
    txs = sorted(txs, key=lambda t: (bids[t.bid_id].price, -bids[t.bid_id].timestamp))
    ranked = _prefix(sort_by_priority(book.asks), volume)
    new = []
    for q, u, k in _refill([t.qty for t in txs], ranked):
        t, a = txs[u], ranked[k]
        new.append(Transaction(t.bid_id, a.id, q, max(t.price, a.price)))
    return Matching(tuple(_coalesce(new)))


def _prefix(ranked: list[Order], volume: int) -> list[Order]:
    """The most competitive orders covering ``volume`` units, last one trimmed."""
    out: list[Order] = []
    left = volume
    for w in ranked:
        if not left:
            break
        out.append(w if w.qty <= left else with_qty(w, left))
        left -= out[-1].qty
    if left:
        raise EngineInvariantError(f"side volume short of matched volume {volume}")
    return out


def max_fair_matching(book: OrderBook) -> Matching:
    """Fair matching of maximum volume (dynamic prices)."""
    return make_fair(maximum_matching(book), book)


MATCHERS = {
    "um_star": um_star,
    "uniform_star": uniform_star,
    "maximum_matching": maximum_matching,
    "max_fair_matching": max_fair_matching,
}

__all__ = [
    "MATCHERS",
    "assign_uniform_price",
    "make_fair",
    "match_greedy",
    "max_fair_matching",
    "maximum_matching",
    "um_star",
    "uniform_ask",
    "uniform_bid",
    "uniform_star",
]
