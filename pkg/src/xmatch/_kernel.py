"""Vectorised linear-time uniform matcher.

Each side is held column-wise: an int64 priority key (smaller is more
competitive), the quantity, and the position of the order in the caller's
list. The key packs ``(price, timestamp)`` into one integer so that
comparing keys is comparing competitiveness:

    bid key = (2**30 - code(price)) << 32 | timestamp
    ask key = code(price) << 32 | timestamp

with ``code(-inf) = 0``, ``code(p) = p + 1`` and ``code(+inf) = 2**30``.
Books whose prices or timestamps do not fit are left to the pure-Python
path in :mod:`xmatch.engine`.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from operator import attrgetter

import numpy as np

from .orders import NEG_INF, POS_INF, EngineInvariantError, Order

GROUP = 5
_CUTOFF = 32
_TOP = 1 << 30
MAX_PRICE = _TOP - 2
MAX_TIMESTAMP = (1 << 32) - 1


class NotEncodable(ValueError):
    pass


_PRICE = attrgetter("price")
_TIMESTAMP = attrgetter("timestamp")
_QTY = attrgetter("qty")


def price_codes(orders: Sequence[Order]) -> np.ndarray:
    """Price codes for ``orders``; only a trailing dummy may carry a sentinel."""
    n = len(orders)
    real = n - 1 if n and orders[-1].is_dummy else n
    try:
        codes = np.fromiter(map(_PRICE, orders[:real]), dtype=np.int64, count=real)
    except OverflowError:
        raise NotEncodable("price does not fit in 64 bits") from None
    if real and codes.max() > MAX_PRICE:
        raise NotEncodable(f"price {codes.max()} above {MAX_PRICE}")
    codes += 1
    if real < n:
        codes = np.append(codes, 0 if orders[-1].price == NEG_INF else _TOP)
    return codes


@dataclass(slots=True)
class Side:
    key: np.ndarray
    qty: np.ndarray
    pos: np.ndarray

    @classmethod
    def from_orders(cls, orders: Sequence[Order], is_bid: bool) -> Side:
        n = len(orders)
        codes = price_codes(orders)
        try:
            ts = np.fromiter(map(_TIMESTAMP, orders), dtype=np.int64, count=n)
            qty = np.fromiter(map(_QTY, orders), dtype=np.int64, count=n)
        except OverflowError:
            raise NotEncodable("timestamp or quantity does not fit in 64 bits") from None
        if n and orders[-1].is_dummy:
            # the dummy's price code alone makes it least competitive
            ts[-1] = min(int(ts[-1]), MAX_TIMESTAMP)
        if n and (ts.min() < 0 or ts.max() > MAX_TIMESTAMP):
            raise NotEncodable("timestamp outside the 32-bit key field")
        hi = _TOP - codes if is_bid else codes
        return cls((hi << 32) | ts, qty, np.arange(n, dtype=np.int64))

    @property
    def size(self) -> int:
        return self.key.size

    def take(self, mask: np.ndarray) -> Side:
        return Side(self.key[mask], self.qty[mask], self.pos[mask])


def bid_code(key):
    """Price code packed in a bid key; works on scalars and arrays."""
    return _TOP - (key >> 32)


def ask_code(key):
    return key >> 32


def select(keys: np.ndarray, k: int) -> int:
    """``k``-th smallest key (0-based), median-of-medians pivoting."""
    a = keys
    while a.size > _CUTOFF:
        m = a.size - a.size % GROUP
        medians = np.sort(a[:m].reshape(-1, GROUP), axis=1)[:, GROUP // 2]
        if m < a.size:
            rest = np.sort(a[m:])
            medians = np.append(medians, rest[(rest.size - 1) // 2])
        pivot = select(medians, (medians.size - 1) // 2)
        below = a < pivot
        n_lo = int(np.count_nonzero(below))
        if k < n_lo:
            a = a[below]
            continue
        above = a > pivot
        n_le = a.size - int(np.count_nonzero(above))
        if k < n_le:
            return int(pivot)
        a = a[above]
        k -= n_le
    return int(np.sort(a)[k])


def select_q(key: np.ndarray, qty: np.ndarray, q: int) -> int:
    """Key of the order whose quantity range contains position ``q``."""
    while True:
        pivot = select(key, (key.size + 1) // 2 - 1)
        ge = key <= pivot
        v = int(qty[ge].sum())
        wq = int(qty[key == pivot][0])
        if v - wq < q <= v:
            return pivot
        if q <= v - wq:
            key, qty = key[ge], qty[ge]
        else:
            lt = ~ge
            key, qty = key[lt], qty[lt]
            q -= v


def split_q(side: Side, q: int) -> tuple[int, Side, Side]:
    pivot = select_q(side.key, side.qty, q)
    mask = side.key <= pivot
    head, tail = side.take(mask), side.take(~mask)
    extra = int(head.qty.sum()) - q
    if extra > 0:
        j = int(np.flatnonzero(head.key == pivot)[0])
        head.qty[j] -= extra
        tail = Side(
            np.append(tail.key, pivot),
            np.append(tail.qty, extra),
            np.append(tail.pos, head.pos[j]),
        )
    return pivot, head, tail


def match_all(bids: Side, asks: Side) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exhaustively pair two equal-volume sides in their current order.

    Equivalent to running the greedy pairing when every bid is tradable with
    every ask: the two cumulative-quantity sequences are merged and each gap
    between consecutive breakpoints becomes one transaction.
    """
    cb = np.cumsum(bids.qty)
    ca = np.cumsum(asks.qty)
    if cb[-1] != ca[-1]:
        raise EngineInvariantError(f"unequal volumes {cb[-1]} vs {ca[-1]} in exhaustive match")
    ends = np.concatenate((cb, ca))
    # two presorted runs: the stable sort degenerates to a linear merge
    order = np.argsort(ends, kind="stable")
    merged = ends[order]
    from_bid = order < cb.size
    first = np.empty(merged.size, dtype=bool)
    first[0] = True
    np.not_equal(merged[1:], merged[:-1], out=first[1:])
    n_bid_before = np.cumsum(from_bid) - from_bid
    n_ask_before = np.arange(merged.size) - np.cumsum(from_bid) + from_bid
    cut = merged[first]
    qty = np.diff(cut, prepend=0)
    return bids.pos[n_bid_before[first]], asks.pos[n_ask_before[first]], qty


def uniform(bids: Side, asks: Side) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Alternately bisect bids and asks, matching or discarding halves.

    Both sides must carry equal volume. Returns ``(bid_pos, ask_pos, qty)``
    arrays, one entry per transaction.
    """
    vb, va = int(bids.qty.sum()), int(asks.qty.sum())
    if vb != va:
        raise EngineInvariantError(f"sides carry unequal volume {vb} vs {va}")
    chunks = []
    on_bids = True
    B, A = bids, asks
    while B.size and A.size:
        if B.size == 1 and A.size == 1 and ask_code(A.key[0]) > bid_code(B.key[0]):
            break
        if on_bids:
            bkey = select(B.key, (B.size + 1) // 2 - 1)
            mask = B.key <= bkey
            B_ge, B_lt = B.take(mask), B.take(~mask)
            q = int(B_ge.qty.sum())
            akey, A_ge, A_le = split_q(A, q)
            if ask_code(akey) <= bid_code(bkey):
                chunks.append(match_all(B_ge, A_ge))
                B, A, vb = B_lt, A_le, vb - q
            else:
                B, A, vb = B_ge, A_ge, q
        else:
            akey = select(A.key, (A.size + 1) // 2 - 1)
            mask = A.key <= akey
            A_ge, A_lt = A.take(mask), A.take(~mask)
            q = int(A_ge.qty.sum())
            bkey, B_ge, B_le = split_q(B, q)
            if ask_code(akey) <= bid_code(bkey):
                chunks.append(match_all(B_ge, A_ge))
                B, A, vb = B_le, A_lt, vb - q
            else:
                B, A, vb = B_ge, A_ge, q
        if int(A.qty.sum()) != vb or int(B.qty.sum()) != vb:
            raise EngineInvariantError("split lost volume balance between sides")
        on_bids = not on_bids
    if not chunks:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty
    return tuple(np.concatenate(c) for c in zip(*chunks))
