"""Temporal granularity: snapping timestamps onto a human-scale grid.

The grid is anchored at midnight and steps by ``precision`` minutes.  A time
is moved to the nearer of its floor and ceil grid points (ties go to the
ceil).  A ceil that would land on or past midnight of the next day is capped
at minute 1439 so that snapped times never leave their calendar day.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, time

from .errors import ConfigError
from .ingest import DayLog

MINUTES_PER_DAY = 1440
LAST_MINUTE = MINUTES_PER_DAY - 1

STANDARD_PRECISIONS = (5, 15, 30, 60, 90, 120)


@dataclass(frozen=True)
class GranularityConfig:
    precision: int = 60

    def __post_init__(self):
        if not isinstance(self.precision, int) or isinstance(self.precision, bool):
            raise ConfigError(f"precision must be an integer number of minutes, got {self.precision!r}")
        if not 0 < self.precision <= MINUTES_PER_DAY:
            raise ConfigError(f"precision must be in 1..{MINUTES_PER_DAY}, got {self.precision}")


def minute_of_day(t: datetime | time | int) -> int:
    """Hour and minute of ``t`` as minutes since midnight; seconds are dropped."""
    if isinstance(t, int):
        if not 0 <= t < MINUTES_PER_DAY:
            raise ValueError(f"minute of day out of range: {t}")
        return t
    return t.hour * 60 + t.minute


def snap_minute(minute: int, precision: int) -> int:
    offset = minute % precision
    if offset == 0:
        return minute
    floor = minute - offset
    ceil = floor + precision
    if offset < precision - offset:
        return floor
    return min(ceil, LAST_MINUTE)


def snap_time(t: datetime | time | int, config: GranularityConfig | int) -> int:
    """Snap a time of day to the granularity grid, returning a minute of day.

    >>> snap_time(time(11, 8), 5)
    670
    >>> format_slot(snap_time(time(11, 8), 60))
    '11:00'
    """
    precision = config.precision if isinstance(config, GranularityConfig) else GranularityConfig(config).precision
    return snap_minute(minute_of_day(t), precision)


def apply_granularity(day: DayLog, config: GranularityConfig | int) -> DayLog:
    """Return a copy of ``day`` with every entity's ``granular_time`` set."""
    if not isinstance(config, GranularityConfig):
        config = GranularityConfig(config)
    p = config.precision
    entities = tuple(
        replace(e, granular_time=snap_minute(e.timestamp.hour * 60 + e.timestamp.minute, p))
        for e in day.entities
    )
    return replace(day, entities=entities, precision=p)


def format_slot(minute: int) -> str:
    return f"{minute // 60:02d}:{minute % 60:02d}"


def parse_slot(text: str) -> int:
    hh, sep, mm = str(text).partition(":")
    if not sep or not hh.isdigit() or not mm.isdigit():
        raise ValueError(f"bad slot {text!r}")
    h, m = int(hh), int(mm)
    if h > 23 or m > 59:
        raise ValueError(f"bad slot {text!r}")
    return h * 60 + m


def slot_interval(minute: int, precision: int) -> str:
    """Render a slot as ``HH:MM-HH:MM`` covering one grid cell."""
    end = minute + precision
    end_txt = "24:00" if end >= MINUTES_PER_DAY else format_slot(end)
    return f"{format_slot(minute)}-{end_txt}"
