"""Group creation, sliding-window mining and profile construction.

Two snapped days are compared slot by slot: an item is a ``(sensor, data)``
pair and a slot's matched items are the intersection of both days' items at
that slot.  A slot with at least ``theta`` matched items forms a
:class:`Group`.

:func:`mine_windows` compares every pair of days inside each window of
``window_size`` consecutive days (step one day).  :func:`baseline_profile`
compares every pair of days and doubles as the correctness oracle: with a
window spanning all days the two must agree exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ConfigError, GranularityMismatch, InsufficientDataError
from .ingest import DayLog
from .temporal import GranularityConfig, format_slot, parse_slot, slot_interval

Item = tuple[str, str]

LOCATION_STATE_SENSOR = "location-state"
# raw coordinates only feed location-state estimation
NON_MOTIF_SENSORS = frozenset({"Location"})
_MOTIF_STATES = ("moving", "stationary")


@dataclass(frozen=True)
class MiningConfig:
    theta: int = 2
    lambda_pct: float = 20.0
    window_size: int = 3
    granularity: GranularityConfig = field(default_factory=GranularityConfig)

    def __post_init__(self):
        if not isinstance(self.theta, int) or self.theta < 1:
            raise ConfigError(f"theta must be an integer >= 1, got {self.theta!r}")
        if isinstance(self.lambda_pct, bool) or not isinstance(self.lambda_pct, (int, float)):
            raise ConfigError(f"lambda must be a number, got {self.lambda_pct!r}")
        if not 0 <= self.lambda_pct <= 100:
            raise ConfigError(f"lambda must be within 0..100, got {self.lambda_pct!r}")
        object.__setattr__(self, "lambda_pct", float(self.lambda_pct))
        if not isinstance(self.window_size, int) or self.window_size < 2:
            raise ConfigError(f"window size must be an integer >= 2, got {self.window_size!r}")
        if isinstance(self.granularity, int):
            object.__setattr__(self, "granularity", GranularityConfig(self.granularity))

    @property
    def precision(self) -> int:
        return self.granularity.precision

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "lambda": self.lambda_pct,
            "window": self.window_size,
            "granularity": self.granularity.precision,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MiningConfig":
        return cls(int(d["theta"]), float(d["lambda"]), int(d["window"]), GranularityConfig(int(d["granularity"])))


@dataclass(frozen=True)
class Group:
    slot: int
    items: frozenset[Item]
    support_days: frozenset[date]
    confidence_pct: float = 0.0

    @property
    def key(self) -> tuple[int, frozenset[Item]]:
        return (self.slot, self.items)

    def sorted_items(self) -> list[Item]:
        return sorted(self.items)


@dataclass(frozen=True)
class Behavior:
    window_start_date: date
    window_dates: tuple[date, ...]
    groups: tuple[Group, ...]


@dataclass
class Profile:
    user_id: str
    motifs: list[Group]
    config: MiningConfig
    num_days: int = 0
    generated_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def motif_keys(self) -> set[tuple[int, frozenset[Item]]]:
        return {m.key for m in self.motifs}

    def to_dict(self) -> dict:
        precision = self.config.precision
        return {
            "user_id": self.user_id,
            "config": self.config.to_dict(),
            "motifs": [
                {
                    "slot": format_slot(m.slot),
                    "items": [{"sensor": s, "data": d} for s, d in m.sorted_items()],
                    "confidence_pct": round(m.confidence_pct, 6),
                    "support_days": [d.isoformat() for d in sorted(m.support_days)],
                    "interval": slot_interval(m.slot, precision),
                }
                for m in self.motifs
            ],
            "num_days": self.num_days,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Profile":
        motifs = [
            Group(
                parse_slot(m["slot"]),
                frozenset((i["sensor"], i["data"]) for i in m["items"]),
                frozenset(date.fromisoformat(s) for s in m["support_days"]),
                float(m["confidence_pct"]),
            )
            for m in d["motifs"]
        ]
        return cls(d["user_id"], motifs, MiningConfig.from_dict(d["config"]), int(d.get("num_days", 0)))


@dataclass
class ComparisonCounter:
    """Deterministic work counters; ``day_pairs`` counts day-vs-day comparisons."""

    day_pairs: int = 0
    slot_intersections: int = 0


def slot_items(day: DayLog) -> dict[int, frozenset[Item]]:
    """Map each occupied slot of a snapped day to its item set."""
    if day.precision is None:
        raise GranularityMismatch(f"day {day.date} has not been snapped to a granularity")
    slots: dict[int, set[Item]] = {}
    for e in day.entities:
        if e.granular_time is None:
            raise GranularityMismatch(f"unsnapped entity on {day.date}")
        bucket = slots.setdefault(e.granular_time, set())
        if e.sensor not in NON_MOTIF_SENSORS:
            bucket.add((e.sensor, e.data))
        if e.location_state in _MOTIF_STATES:
            bucket.add((LOCATION_STATE_SENSOR, e.location_state))
    return {s: frozenset(items) for s, items in slots.items() if items}


def _check_precision(days: Sequence[DayLog]) -> None:
    precisions = {d.precision for d in days}
    if None in precisions:
        raise GranularityMismatch("all days must be snapped before mining")
    if len(precisions) > 1:
        raise GranularityMismatch(f"days snapped with different precisions: {sorted(precisions)}")


def _compare_indexed(
    a: dict[int, frozenset[Item]],
    b: dict[int, frozenset[Item]],
    support: frozenset[date],
    theta: int,
    counter: ComparisonCounter | None,
) -> list[Group]:
    if len(b) < len(a):
        a, b = b, a
    groups = []
    for slot, items in a.items():
        other = b.get(slot)
        if other is None:
            continue
        shared = items & other
        if len(shared) >= theta:
            groups.append(Group(slot, shared, support))
    if counter is not None:
        counter.day_pairs += 1
        counter.slot_intersections += len(a)
    return groups


def compare_days(a: DayLog, b: DayLog, theta: int, counter: ComparisonCounter | None = None) -> list[Group]:
    """Groups formed by the items two snapped days share at the same slot."""
    _check_precision((a, b))
    groups = _compare_indexed(slot_items(a), slot_items(b), frozenset((a.date, b.date)), theta, counter)
    return sorted(groups, key=_group_order)


def _group_order(g: Group):
    return (g.slot, g.sorted_items())


def _merge(target: dict, groups: Iterable[Group]) -> None:
    for g in groups:
        days = target.get(g.key)
        if days is None:
            target[g.key] = set(g.support_days)
        else:
            days.update(g.support_days)


def _require_days(days: Sequence[DayLog]) -> None:
    if len(days) < 2:
        raise InsufficientDataError(f"need at least 2 days to mine, got {len(days)}")
    _check_precision(days)


def window_positions(num_days: int, window_size: int) -> int:
    return max(0, num_days - window_size + 1)


def mine_windows(
    days: Sequence[DayLog], config: MiningConfig, counter: ComparisonCounter | None = None
) -> list[Behavior]:
    """Slide a ``window_size``-day window (step 1) and emit one Behavior per productive window.

    Each day pair inside a window is compared once; overlapping windows reuse
    earlier pair results, so the number of day comparisons is the number of
    pairs at distance less than ``window_size``.
    """
    _require_days(days)
    index = [slot_items(d) for d in days]
    w = config.window_size
    cache: dict[tuple[int, int], list[Group]] = {}
    behaviors = []
    for start in range(window_positions(len(days), w)):
        merged: dict = {}
        for i, j in combinations(range(start, start + w), 2):
            pair = cache.get((i, j))
            if pair is None:
                support = frozenset((days[i].date, days[j].date))
                pair = cache[(i, j)] = _compare_indexed(index[i], index[j], support, config.theta, counter)
            _merge(merged, pair)
        if not merged:
            continue
        groups = tuple(
            sorted((Group(slot, items, frozenset(sd)) for (slot, items), sd in merged.items()), key=_group_order)
        )
        dates = tuple(d.date for d in days[start : start + w])
        behaviors.append(Behavior(dates[0], dates, groups))
    return behaviors


def build_profile(
    behaviors: Iterable[Behavior],
    config: MiningConfig,
    *,
    num_days: int,
    user_id: str = "",
) -> Profile:
    """Collapse repeated groups, score confidence and prune below lambda.

    Confidence is the share of the ``num_days`` mined days on which the group
    was observed, as a percentage.
    """
    merged: dict = {}
    for b in behaviors:
        _merge(merged, b.groups)
    return _profile_from_merged(merged, config, num_days, user_id)


def _profile_from_merged(merged: dict, config: MiningConfig, num_days: int, user_id: str) -> Profile:
    motifs = []
    for (slot, items), support in merged.items():
        conf = len(support) * 100 / num_days if num_days else 0.0
        if conf >= config.lambda_pct:
            motifs.append(Group(slot, items, frozenset(support), conf))
    motifs.sort(key=lambda g: (g.slot, -g.confidence_pct, g.sorted_items()))
    return Profile(user_id, motifs, config, num_days)


def baseline_profile(
    days: Sequence[DayLog],
    config: MiningConfig,
    *,
    user_id: str | None = None,
    counter: ComparisonCounter | None = None,
) -> Profile:
    """Profile from comparing every unordered pair of days (no window)."""
    _require_days(days)
    index = [slot_items(d) for d in days]
    merged: dict = {}
    for i, j in combinations(range(len(days)), 2):
        support = frozenset((days[i].date, days[j].date))
        _merge(merged, _compare_indexed(index[i], index[j], support, config.theta, counter))
    uid = user_id if user_id is not None else days[0].user_id
    return _profile_from_merged(merged, config, len(days), uid)


def mine_profile(
    days: Sequence[DayLog],
    config: MiningConfig,
    *,
    user_id: str | None = None,
    counter: ComparisonCounter | None = None,
) -> Profile:
    """``mine_windows`` followed by ``build_profile`` over already snapped days."""
    behaviors = mine_windows(days, config, counter)
    uid = user_id if user_id is not None else days[0].user_id
    return build_profile(behaviors, config, num_days=len(days), user_id=uid)
