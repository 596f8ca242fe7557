"""Movement-state estimation from WiFi sightings and geographic fixes.

Output is a time-ordered list of :class:`LocationEvent` intervals labelled
``moving``, ``stationary`` or ``unknown``.

WiFi rule: consecutive sightings no more than ``gap_minutes`` apart form a
sequence.  A sequence of all-distinct BSSIDs is ``moving``; any repeated
BSSID makes it ``stationary``; a single sighting is ``unknown``.

Geographic rule: consecutive GPS fixes are compared pairwise (speed and
displacement), Cell-ID fixes in triples (first-to-third distance against
800 m).  Stretches the geographic rules cannot classify fall back to WiFi.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, replace
from datetime import datetime, time, timedelta
from typing import Iterable, Sequence

from .ingest import DayLog, Entity

EARTH_RADIUS_M = 6_371_000.0

WIFI_SENSOR = "WiFi"
LOCATION_SENSOR = "Location"

MOVING = "moving"
STATIONARY = "stationary"
UNKNOWN = "unknown"

DEFAULT_GAP_MINUTES = 12.0
CELLID_MOVE_METERS = 800.0
GPS_MIN_SPEED_MPS = 1.0
GPS_MIN_DISPLACEMENT_M = 50.0
DEFAULT_MAX_GEO_STEP_MINUTES = 60.0


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float
    timestamp: datetime | None = None
    source: str = "gps"

    def __post_init__(self):
        if not (-90.0 <= self.latitude <= 90.0) or not (-180.0 <= self.longitude <= 180.0):
            raise ValueError(f"coordinates out of range: {self.latitude}, {self.longitude}")
        if self.source not in ("gps", "cellid", "other"):
            raise ValueError(f"unknown geo source {self.source!r}")


@dataclass(frozen=True)
class LocationEvent:
    state: str
    start: datetime
    end: datetime
    entities: tuple[Entity, ...] = ()

    def __post_init__(self):
        if self.state not in (MOVING, STATIONARY, UNKNOWN):
            raise ValueError(f"invalid state {self.state!r}")
        if self.start > self.end:
            raise ValueError("event start after end")


@dataclass
class LocationStats:
    """Counters filled in by :func:`estimate_location_states`."""

    distance_computations: int = 0
    skipped: int = 0
    location_entities: int = 0


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a sphere of radius 6,371 km."""
    lat1, lon1, lat2, lon2 = map(math.radians, (a.latitude, a.longitude, b.latitude, b.longitude))
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def geo_point(entity: Entity) -> GeoPoint | None:
    """Decode a ``Location`` entity's ``"lat,lon,source"`` payload, or None if malformed."""
    parts = entity.data.split(",")
    if len(parts) not in (2, 3):
        return None
    try:
        lat, lon = float(parts[0]), float(parts[1])
        source = parts[2].strip() if len(parts) == 3 else "other"
        return GeoPoint(lat, lon, entity.timestamp, source)
    except ValueError:
        return None


def _wifi_events(
    sightings: Sequence[Entity], gap: timedelta, barriers: Sequence[datetime] = ()
) -> list[LocationEvent]:
    events = []
    seq: list[Entity] = []

    def flush():
        if not seq:
            return
        bssids = [e.data for e in seq]
        if len(seq) < 2:
            state = UNKNOWN
        elif len(set(bssids)) == len(bssids):
            state = MOVING
        else:
            state = STATIONARY
        events.append(LocationEvent(state, seq[0].timestamp, seq[-1].timestamp, tuple(seq)))

    for e in sightings:
        if seq:
            prev = seq[-1].timestamp
            # a geographic event between two sightings also ends the sequence
            k = bisect.bisect_right(barriers, prev)
            blocked = k < len(barriers) and barriers[k] <= e.timestamp
            if e.timestamp - prev > gap or blocked:
                flush()
                seq = []
        seq.append(e)
    flush()
    return events


def _classify_geo_steps(points, stats: LocationStats, max_step: timedelta) -> list[str | None]:
    """State of each step ``points[i-1] -> points[i]`` (index i-1), or None."""
    n = len(points)
    steps: list[str | None] = [None] * max(0, n - 1)
    triple_state: dict[int, str] = {}  # keyed by index of the triple's last point

    def short(i):
        return points[i][0].timestamp - points[i - 1][0].timestamp <= max_step

    for i in range(1, n):
        p, q = points[i - 1][0], points[i][0]
        if not short(i):
            continue
        if p.source == "gps" and q.source == "gps":
            d = haversine_distance(p, q)
            stats.distance_computations += 1
            dt = (q.timestamp - p.timestamp).total_seconds()
            speed = d / dt if dt > 0 else (math.inf if d > 0 else 0.0)
            moving = speed > GPS_MIN_SPEED_MPS and d > GPS_MIN_DISPLACEMENT_M
            steps[i - 1] = MOVING if moving else STATIONARY
        elif (
            i >= 2
            and p.source != "gps"
            and q.source != "gps"
            and points[i - 2][0].source != "gps"
            and short(i - 1)
        ):
            d = haversine_distance(points[i - 2][0], q)
            stats.distance_computations += 1
            triple_state[i] = MOVING if d > CELLID_MOVE_METERS else STATIONARY

    for i, state in triple_state.items():
        steps[i - 1] = state
        # the opening step of a Cell-ID run takes the state of the first triple
        if i - 2 not in triple_state and steps[i - 2] is None:
            steps[i - 2] = state
    return steps


def _geo_events(points, stats: LocationStats, max_step: timedelta) -> list[LocationEvent]:
    steps = _classify_geo_steps(points, stats, max_step)
    events = []
    i = 0
    while i < len(steps):
        state = steps[i]
        if state is None:
            i += 1
            continue
        j = i
        while j + 1 < len(steps) and steps[j + 1] == state:
            j += 1
        members = tuple(points[k][1] for k in range(i, j + 2))
        events.append(LocationEvent(state, members[0].timestamp, members[-1].timestamp, members))
        i = j + 1
    return events


def _with_unknown_gaps(events: list[LocationEvent], gap: timedelta) -> list[LocationEvent]:
    out: list[LocationEvent] = []
    for ev in events:
        if out and ev.start - out[-1].end > gap:
            out.append(LocationEvent(UNKNOWN, out[-1].end, ev.start))
        out.append(ev)
    return out


def estimate_location_states(
    entities: Iterable[Entity],
    signal_type: str = "fused",
    *,
    gap_minutes: float = DEFAULT_GAP_MINUTES,
    max_geo_step_minutes: float = DEFAULT_MAX_GEO_STEP_MINUTES,
    stats: LocationStats | None = None,
) -> list[LocationEvent]:
    """Estimate movement-state events for one day of entities.

    ``signal_type`` is ``"wifi_only"`` or ``"fused"``.  Only ``WiFi`` and
    ``Location`` entities are consulted; all other sensors are ignored.
    """
    if signal_type not in ("wifi_only", "fused"):
        raise ValueError(f"unknown signal type {signal_type!r}")
    stats = stats if stats is not None else LocationStats()
    entities = list(entities)
    if not entities:
        return []
    gap = timedelta(minutes=gap_minutes)

    wifi = sorted((e for e in entities if e.sensor == WIFI_SENSOR), key=lambda e: e.timestamp)
    points = []
    if signal_type == "fused":
        for e in sorted((e for e in entities if e.sensor == LOCATION_SENSOR), key=lambda e: e.timestamp):
            stats.location_entities += 1
            p = geo_point(e)
            if p is None:
                stats.skipped += 1
            else:
                points.append((p, e))
    stats.location_entities += len(wifi)

    geo = _geo_events(points, stats, timedelta(minutes=max_geo_step_minutes)) if points else []
    if geo:
        covered = [(ev.start, ev.end) for ev in geo]
        starts = [s for s, _ in covered]

        def inside(t):
            k = bisect.bisect_right(starts, t) - 1
            return k >= 0 and covered[k][0] <= t <= covered[k][1]

        wifi = [e for e in wifi if not inside(e.timestamp)]
        events = geo + _wifi_events(wifi, gap, starts)
        events.sort(key=lambda ev: (ev.start, ev.end))
    else:
        events = _wifi_events(wifi, gap)

    if not events:
        day = min(e.timestamp for e in entities).date()
        return [
            LocationEvent(
                UNKNOWN, datetime.combine(day, time.min), datetime.combine(day, time(23, 59, 59))
            )
        ]
    return _with_unknown_gaps(events, gap)


def annotate_day(day: DayLog, events: Sequence[LocationEvent]) -> DayLog:
    """Copy of ``day`` with ``location_state`` set on entities covered by an event."""
    direct = {}
    for ev in events:
        for e in ev.entities:
            direct[id(e)] = ev.state
    starts = [ev.start for ev in events]
    annotated = []
    for e in day.entities:
        state = direct.get(id(e))
        if state is None:
            k = bisect.bisect_right(starts, e.timestamp) - 1
            if k >= 0 and e.timestamp <= events[k].end:
                state = events[k].state
        annotated.append(replace(e, location_state=state) if state != e.location_state else e)
    return replace(day, entities=tuple(annotated))
