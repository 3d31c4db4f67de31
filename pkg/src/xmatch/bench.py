"""Wall-clock scaling benchmark for the matchers."""

from __future__ import annotations

import gc
import statistics
import time
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, replace

from .engine import maximum_matching, um_star, uniform_star
from .io import InstanceSpec, gen_instance
from .orders import EngineInvariantError, Matching, OrderBook

ALGORITHMS: dict[str, Callable[[OrderBook], Matching]] = {
    "uniform_star": uniform_star,
    "um_star": um_star,
    "maximum_matching": maximum_matching,
}


@dataclass(frozen=True)
class BenchRecord:
    algorithm: str
    n: int
    wall_time: float
    volume: int
    runs: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["runs"] = list(self.runs)
        return d


def time_call(fn: Callable[[OrderBook], Matching], book: OrderBook, repeats: int = 3) -> tuple[float, list[float], int]:
    """Median wall time of ``repeats`` calls after one discarded warm-up call.

    Returns ``(median, times, volume)``. The collector is paused while a
    call is being timed, as :mod:`timeit` does.
    """
    volume = fn(book).volume
    times = []
    was_enabled = gc.isenabled()
    try:
        for _ in range(repeats):
            gc.collect()
            gc.disable()
            t0 = time.perf_counter()
            result = fn(book)
            times.append(time.perf_counter() - t0)
            gc.enable()
            if result.volume != volume:
                raise EngineInvariantError(f"{fn.__name__} is not deterministic")
            del result
    finally:
        if was_enabled:
            gc.enable()
        else:
            gc.disable()
    return statistics.median(times), times, volume


def split_sizes(n: int) -> tuple[int, int]:
    return n // 2, n - n // 2


def run_bench(
    sizes: Sequence[int],
    template: InstanceSpec | None = None,
    algorithms: Sequence[str] = ("uniform_star", "um_star"),
    repeats: int = 3,
    log: Callable[[str], None] | None = None,
) -> list[BenchRecord]:
    """Time each algorithm on one generated instance per size ``n`` (total orders)."""
    unknown = set(algorithms) - ALGORITHMS.keys()
    if unknown:
        raise ValueError(f"unknown algorithms: {sorted(unknown)}")
    template = template or InstanceSpec(0, 0)
    records: list[BenchRecord] = []
    for n in sizes:
        nb, na = split_sizes(n)
        book = gen_instance(replace(template, n_bids=nb, n_asks=na))
        volumes = {}
        for name in algorithms:
            median, times, volume = time_call(ALGORITHMS[name], book, repeats)
            volumes[name] = volume
            records.append(BenchRecord(name, n, median, volume, tuple(times)))
            if log:
                log(f"{name:>16} n={n:<9} median={median:.3f}s volume={volume}")
        if "um_star" in volumes and "uniform_star" in volumes and volumes["um_star"] != volumes["uniform_star"]:
            raise EngineInvariantError(
                f"n={n}: um_star volume {volumes['um_star']} != uniform_star volume {volumes['uniform_star']}"
            )
        del book
    return records
