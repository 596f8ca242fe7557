"""Parsing of raw lifelog records into canonical entities and day logs.

Two line formats are understood:

* ``ubiqlog`` -- one JSON object per line keyed by the sensor name, e.g.
  ``{"WiFi": {"BSSID": "...", "time": "Jan 1, 2014 2:09:42 PM"}}``
* ``generic`` -- the canonical form written by :func:`entity_to_json`,
  ``{"sensor": ..., "timestamp": "<ISO-8601>", "data": ...}``

Every line yields exactly one :class:`Entity` or one :class:`Rejection`.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta, timezone, tzinfo
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataError

log = logging.getLogger(__name__)

UBIQLOG_TIME_FORMAT = "%b %d, %Y %I:%M:%S %p"

LOCATION_STATES = ("moving", "stationary", "unknown")
ACTIVITY_VALUES = ("tilting", "in-vehicle", "on-bicycle", "walking", "still", "unknown")

_ACTIVITY_ALIASES = {
    "tilting": "tilting",
    "in-vehicle": "in-vehicle",
    "invehicle": "in-vehicle",
    "vehicle": "in-vehicle",
    "on-bicycle": "on-bicycle",
    "bicycle": "on-bicycle",
    "walking": "walking",
    "on-foot": "walking",
    "running": "walking",
    "still": "still",
    "unknown": "unknown",
}

# canonical sensor name -> accepted spellings (compared case-insensitively)
_SENSOR_NAMES = {
    "WiFi": ("wifi",),
    "Bluetooth": ("bluetooth",),
    "SMS": ("sms",),
    "Call": ("call",),
    "Application": ("application", "applicationusage", "app"),
    "Location": ("location",),
    "Activity": ("activity", "activitystate"),
}
_SENSOR_LOOKUP = {alias: name for name, aliases in _SENSOR_NAMES.items() for alias in aliases}

# hardware-centric channels dropped from the generic format
DEFAULT_DENY_LIST = frozenset(
    {"battery", "network", "networkusage", "systemprocess", "cpu", "memory", "storage", "screen", "power"}
)

DEFAULT_WEEKEND_DAYS = frozenset({4})  # Friday

# control characters other than tab, plus the unicode replacement char
_CORRUPT_RE = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\x7f\ufffd]")


class Reason:
    EMPTY = "empty"
    CORRUPT = "corrupt"
    MALFORMED_JSON = "malformed_json"
    UNKNOWN_SENSOR = "unknown_sensor"
    DENIED_SENSOR = "denied_sensor"
    BAD_TIMESTAMP = "bad_timestamp"
    MISSING_FIELD = "missing_field"
    INVALID_VALUE = "invalid_value"


@dataclass(frozen=True)
class RawRecord:
    sensor_name: str
    attributes: Mapping[str, str]
    timestamp_text: str


@dataclass(frozen=True)
class Entity:
    """One timestamped observation ``<T, S, D>``.

    ``timestamp`` is a naive wall-clock datetime in the dataset's fixed
    offset.  ``granular_time`` is a minute-of-day set by the temporal module.
    """

    timestamp: datetime
    sensor: str
    data: str
    granular_time: int | None = None
    location_state: str | None = None

    def __post_init__(self):
        if not self.data:
            raise ValueError("entity data must be non-empty")
        if self.location_state is not None and self.location_state not in LOCATION_STATES:
            raise ValueError(f"invalid location state {self.location_state!r}")

    @property
    def item(self) -> tuple[str, str]:
        return (self.sensor, self.data)


@dataclass(frozen=True)
class Rejection:
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class DayLog:
    user_id: str
    date: date
    entities: tuple[Entity, ...] = ()
    is_weekend: bool = False
    precision: int | None = None  # set once entities are snapped

    def __post_init__(self):
        prev = None
        for e in self.entities:
            if e.timestamp.date() != self.date:
                raise ValueError(f"entity at {e.timestamp} does not belong to {self.date}")
            if prev is not None and e.timestamp < prev:
                raise ValueError("day entities must be sorted by timestamp")
            prev = e.timestamp


@dataclass
class RejectionRecord:
    user_id: str
    line_no: int
    reason: str


@dataclass
class Dataset:
    """Result of :func:`load_dataset`."""

    users: dict[str, list[DayLog]] = field(default_factory=dict)
    rejections: list[RejectionRecord] = field(default_factory=list)
    line_counts: dict[str, int] = field(default_factory=dict)

    def rejection_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {u: 0 for u in self.line_counts}
        for r in self.rejections:
            counts[r.user_id] = counts.get(r.user_id, 0) + 1
        return counts


def fixed_offset(minutes: int) -> tzinfo:
    if minutes == 0:
        return timezone.utc
    return timezone(timedelta(minutes=minutes))


def parse_ubiqlog_time(text: str) -> datetime:
    # strptime requires the hour field to be 1..12; %d/%I accept unpadded values
    return datetime.strptime(" ".join(text.split()), UBIQLOG_TIME_FORMAT)


def _get(attrs: Mapping, *names: str):
    lowered = {str(k).lower(): v for k, v in attrs.items()}
    for n in names:
        v = lowered.get(n.lower())
        if v is not None and str(v).strip() != "":
            return str(v).strip()
    return None


def normalize_activity(value: str) -> str | None:
    key = re.sub(r"[\s_]+", "-", value.strip().lower())
    return _ACTIVITY_ALIASES.get(key)


def _geo_source(provider: str | None) -> str:
    p = (provider or "").lower()
    if p == "gps":
        return "gps"
    if p in ("network", "cell", "cellid", "cell-id", "gsm"):
        return "cellid"
    return "other"


def _identifier(sensor: str, attrs: Mapping) -> str | Rejection:
    """Pick the canonical identifier for a UbiqLog record."""
    if sensor == "WiFi":
        value = _get(attrs, "BSSID")
    elif sensor == "Bluetooth":
        value = _get(attrs, "BSSID", "Address", "MAC")
    elif sensor in ("SMS", "Call"):
        number = _get(attrs, "Address", "Number")
        if number is None:
            return Rejection(Reason.MISSING_FIELD, "number")
        kind = _get(attrs, "Type")
        value = f"{number}|{kind.lower()}" if kind else number
    elif sensor == "Application":
        value = _get(attrs, "ProcessName", "Process", "Package")
    elif sensor == "Activity":
        raw = _get(attrs, "State", "Activity", "Type", "Name")
        if raw is None:
            return Rejection(Reason.MISSING_FIELD, "activity")
        value = normalize_activity(raw)
        if value is None:
            return Rejection(Reason.INVALID_VALUE, raw)
    elif sensor == "Location":
        lat, lon = _get(attrs, "Latitude", "Lat"), _get(attrs, "Longitude", "Lon", "Lng")
        if lat is None or lon is None:
            return Rejection(Reason.MISSING_FIELD, "coordinates")
        try:
            flat, flon = float(lat), float(lon)
        except ValueError:
            return Rejection(Reason.INVALID_VALUE, f"{lat},{lon}")
        value = format_location(flat, flon, _geo_source(_get(attrs, "Provider", "Source")))
    else:  # pragma: no cover - guarded by _SENSOR_LOOKUP
        return Rejection(Reason.UNKNOWN_SENSOR, sensor)
    if value is None:
        return Rejection(Reason.MISSING_FIELD, sensor)
    return value


def format_location(lat: float, lon: float, source: str) -> str:
    return f"{lat!r},{lon!r},{source}"


def to_raw_record(obj) -> RawRecord | Rejection:
    if not isinstance(obj, dict) or len(obj) != 1:
        return Rejection(Reason.MALFORMED_JSON, "expected a single sensor key")
    (name, attrs), = obj.items()
    if not isinstance(attrs, dict):
        return Rejection(Reason.MALFORMED_JSON, "sensor payload is not an object")
    ts = _get(attrs, "time", "timestamp", "date")
    if ts is None:
        return Rejection(Reason.BAD_TIMESTAMP, "no time field")
    return RawRecord(str(name), {str(k): str(v) for k, v in attrs.items()}, ts)


def _parse_ubiqlog(obj) -> Entity | Rejection:
    raw = to_raw_record(obj)
    if isinstance(raw, Rejection):
        return raw
    sensor = _SENSOR_LOOKUP.get(re.sub(r"[\s_]+", "", raw.sensor_name.lower()))
    if sensor is None:
        return Rejection(Reason.UNKNOWN_SENSOR, raw.sensor_name)
    try:
        ts = parse_ubiqlog_time(raw.timestamp_text)
    except ValueError:
        return Rejection(Reason.BAD_TIMESTAMP, raw.timestamp_text)
    ident = _identifier(sensor, raw.attributes)
    if isinstance(ident, Rejection):
        return ident
    return Entity(timestamp=ts, sensor=sensor, data=ident)


def _parse_generic(obj, tz: tzinfo, deny_list: frozenset[str]) -> Entity | Rejection:
    if not isinstance(obj, dict):
        return Rejection(Reason.MALFORMED_JSON, "expected an object")
    sensor, ts_text, data = obj.get("sensor"), obj.get("timestamp"), obj.get("data")
    if not sensor or not isinstance(sensor, str):
        return Rejection(Reason.MISSING_FIELD, "sensor")
    if re.sub(r"[\s_\-]+", "", sensor.lower()) in deny_list:
        return Rejection(Reason.DENIED_SENSOR, sensor)
    if data is None or str(data) == "":
        return Rejection(Reason.MISSING_FIELD, "data")
    if not isinstance(ts_text, str):
        return Rejection(Reason.BAD_TIMESTAMP, repr(ts_text))
    try:
        ts = datetime.fromisoformat(ts_text)
    except ValueError:
        return Rejection(Reason.BAD_TIMESTAMP, ts_text)
    if ts.tzinfo is not None:
        ts = ts.astimezone(tz).replace(tzinfo=None)
    state = obj.get("location_state")
    if state is not None and state not in LOCATION_STATES:
        return Rejection(Reason.INVALID_VALUE, f"location_state={state}")
    granular = obj.get("granular_time")
    if granular is not None:
        try:
            from .temporal import parse_slot

            granular = parse_slot(granular)
        except ValueError:
            return Rejection(Reason.INVALID_VALUE, f"granular_time={granular}")
    return Entity(ts, sensor, str(data), granular, state)


def parse_record(
    line: str | bytes,
    source_format: str = "ubiqlog",
    *,
    tz_offset_minutes: int = 0,
    deny_list: frozenset[str] = DEFAULT_DENY_LIST,
) -> Entity | Rejection:
    """Parse one line into an :class:`Entity` or a :class:`Rejection`.

    ``source_format`` is ``"ubiqlog"``, ``"generic"`` or ``"auto"`` (decided
    per line by the presence of a top-level ``"sensor"`` key).
    """
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError:
            return Rejection(Reason.CORRUPT, "not valid utf-8")
    line = line.strip()
    if not line:
        return Rejection(Reason.EMPTY)
    if _CORRUPT_RE.search(line):
        return Rejection(Reason.CORRUPT, "control or replacement character")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        return Rejection(Reason.MALFORMED_JSON, str(exc))

    fmt = source_format
    if fmt == "auto":
        fmt = "generic" if isinstance(obj, dict) and "sensor" in obj else "ubiqlog"
    if fmt == "ubiqlog":
        return _parse_ubiqlog(obj)
    if fmt == "generic":
        return _parse_generic(obj, fixed_offset(tz_offset_minutes), deny_list)
    raise ValueError(f"unknown source format {source_format!r}")


def entity_to_json(entity: Entity, tz_offset_minutes: int = 0) -> str:
    """Canonical JSON-lines representation (no trailing newline)."""
    out = {
        "sensor": entity.sensor,
        "timestamp": entity.timestamp.replace(tzinfo=fixed_offset(tz_offset_minutes)).isoformat(),
        "data": entity.data,
    }
    if entity.location_state is not None:
        out["location_state"] = entity.location_state
    if entity.granular_time is not None:
        from .temporal import format_slot

        out["granular_time"] = format_slot(entity.granular_time)
    return json.dumps(out, ensure_ascii=False)


def bucket_days(
    user_id: str,
    entities: Iterable[Entity],
    *,
    weekend_days: frozenset[int] = DEFAULT_WEEKEND_DAYS,
    exclude_weekend: bool = False,
) -> list[DayLog]:
    """Group entities by calendar date into sorted :class:`DayLog` objects."""
    by_date: dict[date, list[Entity]] = defaultdict(list)
    for e in entities:
        by_date[e.timestamp.date()].append(e)
    days = []
    for d in sorted(by_date):
        weekend = d.weekday() in weekend_days
        if weekend and exclude_weekend:
            continue
        ents = sorted(by_date[d], key=lambda e: e.timestamp)
        days.append(DayLog(user_id, d, tuple(ents), weekend))
    return days


def _user_sources(root: Path) -> dict[str, list[Path]]:
    users: dict[str, list[Path]] = {}
    for child in sorted(root.iterdir()):
        if child.name.startswith("."):
            continue
        if child.is_dir():
            files = sorted(p for p in child.rglob("*") if p.is_file() and not p.name.startswith("."))
            users[child.name] = files
        elif child.is_file() and child.suffix in (".jsonl", ".json", ".txt", ".log"):
            users.setdefault(child.stem, []).append(child)
    return users


def load_dataset(
    source: str | Path,
    *,
    source_format: str = "auto",
    exclude_weekend: bool = False,
    weekend_days: Iterable[int] = DEFAULT_WEEKEND_DAYS,
    tz_offset_minutes: int = 0,
    deny_list: frozenset[str] = DEFAULT_DENY_LIST,
) -> Dataset:
    """Load a directory of per-user JSON-lines logs.

    Each subdirectory (all files inside) or each ``*.jsonl`` file is one user.
    Weekday numbers follow :meth:`datetime.date.weekday` (Monday is 0).
    Bad lines become :class:`RejectionRecord` entries; an unreadable root
    raises :class:`DataError`.
    """
    root = Path(source)
    if not root.is_dir():
        raise DataError(f"cannot read dataset directory {root}")
    weekend = frozenset(weekend_days)
    result = Dataset()
    for user_id, files in _user_sources(root).items():
        entities: list[Entity] = []
        line_no = 0
        for path in files:
            try:
                blob = path.read_bytes()
            except OSError as exc:
                raise DataError(f"cannot read {path}: {exc}") from exc
            for raw in blob.splitlines():
                line_no += 1
                parsed = parse_record(
                    raw, source_format, tz_offset_minutes=tz_offset_minutes, deny_list=deny_list
                )
                if isinstance(parsed, Rejection):
                    result.rejections.append(RejectionRecord(user_id, line_no, parsed.reason))
                else:
                    entities.append(parsed)
        result.line_counts[user_id] = line_no
        result.users[user_id] = bucket_days(
            user_id, entities, weekend_days=weekend, exclude_weekend=exclude_weekend
        )
        log.debug("user %s: %d lines, %d entities", user_id, line_no, len(entities))
    return result


def write_canonical(days: Iterable[DayLog], path: str | Path, tz_offset_minutes: int = 0) -> int:
    """Write day logs as canonical JSON lines; returns the number of lines."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for day in days:
            for e in day.entities:
                fh.write(entity_to_json(e, tz_offset_minutes))
                fh.write("\n")
                n += 1
    return n


def write_rejections(rejections: Iterable[RejectionRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "line_no", "reason"])
        for r in rejections:
            w.writerow([r.user_id, r.line_no, r.reason])


def with_entities(day: DayLog, entities: Iterable[Entity], **changes) -> DayLog:
    return replace(day, entities=tuple(entities), **changes)
