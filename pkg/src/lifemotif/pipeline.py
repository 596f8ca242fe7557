"""End-to-end helpers: location annotation, snapping and mining per user."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Mapping, Sequence

from .ingest import DayLog
from .location import annotate_day, estimate_location_states
from .mining import MiningConfig, Profile, mine_profile
from .temporal import GranularityConfig, apply_granularity

LOCATION_MODES = ("none", "wifi_only", "fused")


def prepare_day(day: DayLog, granularity: GranularityConfig | int, location: str = "fused") -> DayLog:
    if location not in LOCATION_MODES:
        raise ValueError(f"unknown location mode {location!r}")
    if location != "none" and day.entities:
        day = annotate_day(day, estimate_location_states(day.entities, location))
    return apply_granularity(day, granularity)


def prepare_days(days: Sequence[DayLog], granularity: GranularityConfig | int, location: str = "fused") -> list[DayLog]:
    return [prepare_day(d, granularity, location) for d in days]


def mine_user(days: Sequence[DayLog], config: MiningConfig, location: str = "fused", user_id: str | None = None) -> Profile:
    prepared = prepare_days(days, config.granularity, location)
    return mine_profile(prepared, config, user_id=user_id)


def mine_dataset(
    users: Mapping[str, Sequence[DayLog]],
    config: MiningConfig,
    location: str = "fused",
    threads: int = 1,
) -> dict[str, Profile]:
    """Mine every user; users are independent so ``threads > 1`` only changes speed."""
    ids = sorted(users)
    if threads <= 1:
        return {u: mine_user(users[u], config, location, u) for u in ids}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = pool.map(lambda u: mine_user(users[u], config, location, u), ids)
        return dict(zip(ids, results))
