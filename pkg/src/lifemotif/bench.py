"""Window-size vs execution-time benchmark.

For each day count ``d`` and each window size (plus the all-pairs baseline)
the first ``d`` days of every user are mined.  Wall time is the median of
``repetitions`` timed runs after one discarded warm-up run; the comparison
counter is exact and independent of the machine.
"""

from __future__ import annotations

import csv
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .ingest import DayLog
from .mining import ComparisonCounter, MiningConfig, baseline_profile, mine_profile
from .temporal import GranularityConfig

BASELINE = "baseline"


@dataclass(frozen=True)
class BenchRow:
    num_days: int
    window: int | str
    wall_time_ms: float
    comparisons: int


def _run_once(users: Mapping[str, Sequence[DayLog]], d: int, window, theta: int, precision: int, threads: int):
    counter = ComparisonCounter()

    def one(uid):
        local = ComparisonCounter()
        days = users[uid][:d]
        if window == BASELINE:
            cfg = MiningConfig(theta, 0.0, 2, GranularityConfig(precision))
            baseline_profile(days, cfg, user_id=uid, counter=local)
        else:
            cfg = MiningConfig(theta, 0.0, int(window), GranularityConfig(precision))
            mine_profile(days, cfg, user_id=uid, counter=local)
        return local

    ids = sorted(users)
    t0 = time.perf_counter()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counters = list(pool.map(one, ids))
    else:
        counters = [one(u) for u in ids]
    elapsed = (time.perf_counter() - t0) * 1000.0
    for c in counters:
        counter.day_pairs += c.day_pairs
        counter.slot_intersections += c.slot_intersections
    return elapsed, counter


def run_benchmark(
    dataset: Mapping[str, Sequence[DayLog]],
    days_schedule: Sequence[int],
    window_sizes: Sequence[int],
    *,
    repetitions: int = 3,
    theta: int = 2,
    threads: int = 1,
    include_baseline: bool = True,
) -> list[BenchRow]:
    """Benchmark already snapped per-user day logs.

    Returns one row per ``(day count, window)`` with ``"baseline"`` last in
    each day-count block.
    """
    if repetitions < 3:
        raise ConfigError("repetitions must be >= 3")
    if not dataset:
        raise InsufficientDataError("benchmark dataset has no users")
    if not days_schedule or min(days_schedule) < 2:
        raise ConfigError("day counts must be >= 2")
    need = max(days_schedule)
    short = [u for u, days in dataset.items() if len(days) < need]
    if short:
        raise InsufficientDataError(f"{len(short)} user(s) have fewer than {need} days, e.g. {short[0]}")
    precisions = {d.precision for days in dataset.values() for d in days}
    if len(precisions) != 1 or None in precisions:
        raise ConfigError("benchmark days must be snapped with one granularity")
    precision = precisions.pop()

    windows: list[int | str] = [int(w) for w in window_sizes]
    if include_baseline:
        windows.append(BASELINE)
    rows = []
    for d in days_schedule:
        for w in windows:
            _run_once(dataset, d, w, theta, precision, threads)  # warm-up, discarded
            times = []
            counter = None
            for _ in range(repetitions):
                elapsed, counter = _run_once(dataset, d, w, theta, precision, threads)
                times.append(elapsed)
            rows.append(BenchRow(d, w, statistics.median(times), counter.day_pairs))
    return rows


def expected_comparisons(num_days: int, window: int | str) -> int:
    """Closed-form day-pair count per user for a window size or the baseline."""
    if window == BASELINE:
        return num_days * (num_days - 1) // 2
    w = int(window)
    if w > num_days:
        return 0  # no window position fits
    return sum(num_days - k for k in range(1, w))


def fit_exponent(rows: Iterable[BenchRow], window: int | str, metric: str = "wall_time_ms") -> float:
    """Slope of log(metric) against log(num_days) for one window setting."""
    pts = [(r.num_days, getattr(r, metric)) for r in rows if r.window == window and getattr(r, metric) > 0]
    if len(pts) < 2:
        return math.nan
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def write_bench_csv(rows: Iterable[BenchRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["num_days", "window", "wall_time_ms", "comparisons"])
        for r in rows:
            w.writerow([r.num_days, r.window, f"{r.wall_time_ms:.3f}", r.comparisons])
