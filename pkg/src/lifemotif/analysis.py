"""Motif distribution over day segments, user term vectors and threshold sweeps."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, MotifError
from .ingest import DayLog
from .mining import MiningConfig, Profile, build_profile, mine_windows
from .pipeline import prepare_days
from .temporal import MINUTES_PER_DAY, GranularityConfig

log = logging.getLogger(__name__)

HIGH_CONFIDENCE_PCT = 20.0


@dataclass(frozen=True)
class DaySegment:
    label: str
    start_minute: int
    end_minute: int

    def __post_init__(self):
        if not 0 <= self.start_minute < self.end_minute <= MINUTES_PER_DAY:
            raise ConfigError(f"bad segment bounds {self.start_minute}..{self.end_minute}")

    def contains(self, minute: int) -> bool:
        return self.start_minute <= minute < self.end_minute


DEFAULT_SEGMENTS = (
    DaySegment("0-8", 0, 480),
    DaySegment("8-16", 480, 960),
    DaySegment("16-24", 960, 1440),
)

FEATURE_TERMS = (
    "0-8 & <20%",
    "0-8 & >=20%",
    "8-16 & <20%",
    "8-16 & >=20%",
    "16-24 & <20%",
    "16-24 & >=20%",
)


@dataclass(frozen=True)
class UserFeatureVector:
    user_id: str
    counts: tuple[int, int, int, int, int, int]


def validate_segments(segments: Sequence[DaySegment]) -> None:
    """Segments must tile ``[0, 1440)`` exactly, in any order."""
    ordered = sorted(segments, key=lambda s: s.start_minute)
    cursor = 0
    for seg in ordered:
        if seg.start_minute != cursor:
            raise ConfigError(f"segments overlap or leave a gap at minute {cursor}")
        cursor = seg.end_minute
    if cursor != MINUTES_PER_DAY:
        raise ConfigError("segments do not cover the whole day")


def segment_of(minute: int, segments: Sequence[DaySegment] = DEFAULT_SEGMENTS) -> DaySegment:
    for seg in segments:
        if seg.contains(minute):
            return seg
    raise ConfigError(f"minute {minute} is not covered by any segment")


def segment_distribution(profile: Profile, segments: Sequence[DaySegment] = DEFAULT_SEGMENTS) -> dict[str, int]:
    validate_segments(segments)
    counts = {s.label: 0 for s in segments}
    for m in profile.motifs:
        counts[segment_of(m.slot, segments).label] += 1
    return counts


def user_feature_vector(profile: Profile, high_pct: float = HIGH_CONFIDENCE_PCT) -> UserFeatureVector:
    counts = [0] * 6
    for m in profile.motifs:
        seg = DEFAULT_SEGMENTS.index(segment_of(m.slot))
        counts[2 * seg + (m.confidence_pct >= high_pct)] += 1
    return UserFeatureVector(profile.user_id, tuple(counts))


@dataclass(frozen=True)
class SweepRow:
    theta: int
    lambda_pct: float
    granularity: int
    motif_count: int | None  # None when the cell failed
    mean_per_user: float | None
    users: int


def threshold_sweep(
    days: Sequence[DayLog] | Mapping[str, Sequence[DayLog]],
    theta_values: Iterable[int],
    lambda_values: Iterable[float],
    granularities: Iterable[int],
    *,
    window_size: int = 3,
    location: str = "none",
) -> list[SweepRow]:
    """Motif counts for every (theta, lambda, granularity) combination.

    ``days`` is one user's day list or a mapping of users to day lists.  Each
    cell is equivalent to an independent mining run; the window groups of a
    (granularity, theta) pair are shared across lambda values because
    pruning by lambda happens after they are built.
    """
    thetas, lambdas, grans = list(theta_values), list(lambda_values), list(granularities)
    if not thetas or not lambdas or not grans:
        raise ConfigError("sweep grids must be non-empty")
    users = dict(days) if isinstance(days, Mapping) else {"": list(days)}

    rows = []
    for g in grans:
        prepared = {u: prepare_days(d, GranularityConfig(g), location) for u, d in users.items()}
        for theta in thetas:
            behaviors = {}
            failed = None
            try:
                probe = MiningConfig(theta, 0.0, window_size, GranularityConfig(g))
                for u, d in prepared.items():
                    behaviors[u] = (mine_windows(d, probe), len(d))
            except MotifError as exc:
                failed = exc
                log.warning("sweep cell theta=%s granularity=%s failed: %s", theta, g, exc)
            for lam in lambdas:
                if failed is not None:
                    rows.append(SweepRow(theta, lam, g, None, None, len(users)))
                    continue
                cfg = MiningConfig(theta, lam, window_size, GranularityConfig(g))
                counts = [
                    len(build_profile(b, cfg, num_days=n, user_id=u).motifs) for u, (b, n) in behaviors.items()
                ]
                total = sum(counts)
                rows.append(SweepRow(theta, lam, g, total, total / len(counts), len(users)))
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "lambda", "granularity", "motif_count", "mean_per_user"])
        for r in rows:
            w.writerow(
                [
                    r.theta,
                    _num(r.lambda_pct),
                    r.granularity,
                    "NA" if r.motif_count is None else r.motif_count,
                    "NA" if r.mean_per_user is None else f"{r.mean_per_user:.4f}",
                ]
            )


def write_segments_csv(profiles: Iterable[Profile], path: str | Path, segments=DEFAULT_SEGMENTS) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "segment", "count"])
        for p in profiles:
            for label, count in segment_distribution(p, segments).items():
                w.writerow([p.user_id, label, count])


def write_features_csv(profiles: Iterable[Profile], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "t1", "t2", "t3", "t4", "t5", "t6"])
        for p in profiles:
            w.writerow([p.user_id, *user_feature_vector(p).counts])


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else str(x)
