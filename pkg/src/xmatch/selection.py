"""Deterministic linear-time selection over order lists.

Everything here works on plain sequences of :class:`~xmatch.orders.Order`
and is the reference path; :mod:`xmatch._kernel` holds the vectorised
equivalent used by the production matcher.
"""

from __future__ import annotations

from collections.abc import Sequence

from .orders import Order, priority_key, vol, with_qty

GROUP = 5
_CUTOFF = 10


class ComparisonCounter:
    """Tallies key comparisons made by the selection routines."""

    def __init__(self) -> None:
        self.count = 0


class _Counted:
    __slots__ = ("key", "counter")

    def __init__(self, key, counter: ComparisonCounter) -> None:
        self.key = key
        self.counter = counter

    def __lt__(self, other: _Counted) -> bool:
        self.counter.count += 1
        return self.key < other.key


def _keys(omega: Sequence[Order], counter: ComparisonCounter | None) -> list:
    # (key, position) pairs are unique even if two parts of one order share a key
    keys = [(priority_key(w), i) for i, w in enumerate(omega)]
    if counter is not None:
        keys = [_Counted(k, counter) for k in keys]
    return keys


def _position(item) -> int:
    return item.key[1] if isinstance(item, _Counted) else item[1]


def _mom_select(items: list, k: int):
    """Return the ``k``-th smallest item (0-based) by median of medians."""
    while len(items) > _CUTOFF:
        medians = []
        for i in range(0, len(items), GROUP):
            group = sorted(items[i:i + GROUP])
            medians.append(group[(len(group) - 1) // 2])
        pivot = _mom_select(medians, (len(medians) - 1) // 2)
        lo, hi = [], []
        for x in items:
            if x < pivot:
                lo.append(x)
            elif pivot < x:
                hi.append(x)
        if k < len(lo):
            items = lo
        elif k == len(lo):
            return pivot
        else:
            k -= len(lo) + 1
            items = hi
    return sorted(items)[k]


def select_kth(omega: Sequence[Order], t: int, *, counter: ComparisonCounter | None = None) -> Order:
    """Return the ``t``-th most competitive order (``t`` is 1-based)."""
    if not 1 <= t <= len(omega):
        raise IndexError(f"rank {t} out of range for {len(omega)} orders")
    return omega[_position(_mom_select(_keys(omega, counter), t - 1))]


def select_q(omega: Sequence[Order], q: int, *, counter: ComparisonCounter | None = None) -> Order:
    """Return the order whose quantity range contains position ``q``."""
    if not 1 <= q <= vol(omega):
        raise IndexError(f"quantity {q} out of range for volume {vol(omega)}")
    items = _keys(omega, counter)
    while True:
        pivot = _mom_select(list(items), (len(items) + 1) // 2 - 1)
        w = omega[_position(pivot)]
        ge = [x for x in items if not pivot < x]
        v = sum(omega[_position(x)].qty for x in ge)
        if v - w.qty < q <= v:
            return w
        if q <= v - w.qty:
            items = ge
        else:
            items = [x for x in items if pivot < x]
            q -= v


def split_q(
    omega: Sequence[Order], q: int, *, counter: ComparisonCounter | None = None
) -> tuple[Order, list[Order], list[Order]]:
    """Cut ``omega`` so the more competitive part holds exactly ``q`` units.

    Returns ``(w, head, tail)`` where ``w`` is the order straddling position
    ``q``. If ``w`` is cut, ``head`` and ``tail`` each carry a part of it
    under the same id.
    """
    w = select_q(omega, q, counter=counter)
    pivot = priority_key(w)
    head: list[Order] = []
    tail: list[Order] = []
    for x in omega:
        (head if priority_key(x) <= pivot else tail).append(x)
    extra = vol(head) - q
    if extra > 0:
        head = [x for x in head if x is not w]
        head.append(with_qty(w, w.qty - extra))
        tail.append(with_qty(w, extra))
    return w, head, tail
