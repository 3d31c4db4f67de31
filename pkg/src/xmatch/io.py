"""Order and matching files (CSV / JSON) and random instance generation."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .orders import Matching, Order, OrderBook, OrderBookError, Side, Transaction

ORDER_FIELDS = ("side", "id", "timestamp", "price", "qty")
MATCHING_FIELDS = ("bid_id", "ask_id", "qty", "price")


class ParseError(ValueError):
    def __init__(self, path, line: int | None, message: str) -> None:
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.line = line


def _format(path: Path, fmt: str | None) -> str:
    if fmt is None:
        fmt = "json" if path.suffix.lower() == ".json" else "csv"
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    return fmt


def _natural(value, path, line: int | None, name: str) -> int:
    if isinstance(value, bool):
        raise ParseError(path, line, f"{name} must be a natural number, got {value!r}")
    if isinstance(value, int):
        n = value
    elif isinstance(value, str) and value.strip().isdigit():
        n = int(value.strip())
    else:
        raise ParseError(path, line, f"{name} must be a natural number, got {value!r}")
    if n < 0:
        raise ParseError(path, line, f"{name} must be a natural number, got {value!r}")
    return n


def _order(row: dict, path, line: int | None) -> Order:
    side = str(row.get("side", "")).strip().upper()
    if side not in ("B", "A"):
        raise ParseError(path, line, f"unknown side {row.get('side')!r}")
    fields = {name: _natural(row.get(name), path, line, name) for name in ORDER_FIELDS[1:]}
    if fields["qty"] < 1:
        raise ParseError(path, line, "qty must be at least 1")
    return Order(fields["id"], fields["timestamp"], Side(side), fields["price"], fields["qty"])


def _rows(path: Path, fmt: str, fields: tuple[str, ...]):
    """Yield ``(line_number, row_dict)`` pairs from a CSV or JSON file."""
    if fmt == "csv":
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != fields:
                raise ParseError(path, 1, f"expected header {','.join(fields)}")
            for row in reader:
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(fields):
                    raise ParseError(path, reader.line_num, f"expected {len(fields)} columns, got {len(row)}")
                yield reader.line_num, dict(zip(fields, row))
        return
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    if not isinstance(data, list):
        raise ParseError(path, None, "expected a JSON array of objects")
    for i, row in enumerate(data):
        if not isinstance(row, dict):
            raise ParseError(path, None, f"entry {i} is not an object")
        yield None, row


def parse_orders(path, fmt: str | None = None) -> OrderBook:
    path = Path(path)
    fmt = _format(path, fmt)
    bids: list[Order] = []
    asks: list[Order] = []
    for line, row in _rows(path, fmt, ORDER_FIELDS):
        w = _order(row, path, line)
        (bids if w.side is Side.BID else asks).append(w)
    try:
        return OrderBook(bids, asks)
    except OrderBookError as exc:
        raise ParseError(path, None, str(exc)) from None


def write_orders(book: OrderBook, path, fmt: str | None = None) -> None:
    path = Path(path)
    rows = [
        {"side": w.side.value, "id": w.id, "timestamp": w.timestamp, "price": w.price, "qty": w.qty}
        for w in book.orders()
    ]
    _write(path, _format(path, fmt), ORDER_FIELDS, rows)


def write_matching(m: Matching, path, fmt: str | None = None, *, book: OrderBook | None = None) -> None:
    """Write transactions in engine order; with ``book``, refuse a matching invalid over it."""
    if book is not None:
        from .verification import check_valid

        report = check_valid(m, book)
        if not report.passed:
            raise ValueError(f"refusing to write an invalid matching: {report.violations[0]}")
    path = Path(path)
    rows = [{"bid_id": t.bid_id, "ask_id": t.ask_id, "qty": t.qty, "price": t.price} for t in m.transactions]
    _write(path, _format(path, fmt), MATCHING_FIELDS, rows)


def _write(path: Path, fmt: str, fields: tuple[str, ...], rows: list[dict]) -> None:
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(fields)
            writer.writerows([r[f] for f in fields] for r in rows)
    else:
        path.write_text(json.dumps(rows, indent=1) + "\n")


def read_matching(path, fmt: str | None = None) -> Matching:
    path = Path(path)
    txs = []
    for line, row in _rows(path, _format(path, fmt), MATCHING_FIELDS):
        vals = {f: _natural(row.get(f), path, line, f) for f in MATCHING_FIELDS}
        if vals["qty"] < 1:
            raise ParseError(path, line, "transaction qty must be at least 1")
        txs.append(Transaction(vals["bid_id"], vals["ask_id"], vals["qty"], vals["price"]))
    return Matching(tuple(txs))


@dataclass(frozen=True)
class InstanceSpec:
    n_bids: int
    n_asks: int
    price_low: int = 1
    price_high: int = 1_000_000
    qty_low: int = 1
    qty_high: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.n_bids, self.n_asks, self.price_low) < 0:
            raise ValueError("sizes and prices must be natural numbers")
        if self.price_low > self.price_high:
            raise ValueError("price_low exceeds price_high")
        if not 1 <= self.qty_low <= self.qty_high:
            raise ValueError("need 1 <= qty_low <= qty_high")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


def gen_instance(spec: InstanceSpec) -> OrderBook:
    """Random book with uniform prices and quantities.

    Bids get ids ``1..n_bids`` and asks continue from ``n_bids + 1``, so ids
    are unique across the book; timestamps run ``1..n`` within each side.
    """
    rng = np.random.default_rng(spec.seed)
    sides = []
    for n in (spec.n_bids, spec.n_asks):
        prices = rng.integers(spec.price_low, spec.price_high, size=n, endpoint=True).tolist()
        qtys = rng.integers(spec.qty_low, spec.qty_high, size=n, endpoint=True).tolist()
        sides.append((prices, qtys))
    (bp, bq), (ap, aq) = sides
    nb = spec.n_bids
    bids = [Order(i + 1, i + 1, Side.BID, p, q) for i, (p, q) in enumerate(zip(bp, bq))]
    asks = [Order(nb + i + 1, i + 1, Side.ASK, p, q) for i, (p, q) in enumerate(zip(ap, aq))]
    return OrderBook(bids, asks)
