from datetime import date, datetime, time

import pytest
from hypothesis import given, strategies as st

from lifemotif.errors import ConfigError
from lifemotif.temporal import (
    LAST_MINUTE,
    STANDARD_PRECISIONS,
    GranularityConfig,
    apply_granularity,
    format_slot,
    parse_slot,
    slot_interval,
    snap_minute,
    snap_time,
)

from conftest import make_day


def brute_force_snap(minute, precision):
    """Nearest grid point by exhaustive search; ties prefer the later point."""
    grid = list(range(0, 1440 + precision, precision))
    best = min(grid, key=lambda g: (abs(g - minute), -g))
    return min(best, LAST_MINUTE)


@pytest.mark.parametrize(
    "t, precision, expected",
    [
        (time(11, 8), 5, "11:10"),
        (time(14, 0), 60, "14:00"),
        (time(11, 8), 60, "11:00"),
        (time(11, 15), 30, "11:30"),
    ],
)
def test_documented_examples(t, precision, expected):
    assert format_slot(snap_time(t, precision)) == expected


def test_seconds_are_truncated():
    # 11:07:59 is treated as 11:07, which snaps down on a 5' grid
    assert format_slot(snap_time(datetime(2014, 1, 1, 11, 7, 59), 5)) == "11:05"


def test_ninety_minute_grid_anchors_at_midnight():
    assert snap_time(time(1, 20), 90) == 90
    assert snap_time(time(2, 30), 90) == 180
    assert snap_time(time(22, 30), 90) == 1350


def test_day_edge_caps_at_last_minute():
    assert snap_time(time(23, 50), 60) == LAST_MINUTE
    assert snap_time(time(23, 29), 60) == 23 * 60
    assert snap_time(time(13, 0), 1440) == LAST_MINUTE
    assert snap_time(time(11, 59), 1440) == 0


@pytest.mark.parametrize("precision", STANDARD_PRECISIONS + (7, 45, 1440))
def test_matches_brute_force_for_every_minute(precision):
    for m in range(1440):
        assert snap_minute(m, precision) == brute_force_snap(m, precision), m


@given(st.integers(0, 1439), st.integers(1, 1440))
def test_properties(minute, precision):
    s = snap_minute(minute, precision)
    assert 0 <= s <= LAST_MINUTE
    assert snap_minute(s, precision) == s
    assert abs(s - minute) <= precision / 2
    if minute < 1439:
        assert snap_minute(minute + 1, precision) >= s


@pytest.mark.parametrize("bad", [0, -5, 1441])
def test_invalid_precision(bad):
    with pytest.raises(ConfigError):
        GranularityConfig(bad)


def test_apply_granularity_example():
    day = make_day(date(2014, 1, 1), [("11:08", "WiFi", "a"), ("11:09", "SMS", "b"), ("11:12", "Call", "c")])
    out = apply_granularity(day, GranularityConfig(5))
    assert [format_slot(e.granular_time) for e in out.entities] == ["11:10"] * 3
    assert [e.timestamp for e in out.entities] == [e.timestamp for e in day.entities]
    assert [(e.sensor, e.data) for e in out.entities] == [(e.sensor, e.data) for e in day.entities]
    assert out.precision == 5


def test_apply_granularity_empty_day():
    day = make_day(date(2014, 1, 1), [])
    assert apply_granularity(day, 15).entities == ()


def test_apply_granularity_whole_day_cell():
    day = make_day(date(2014, 1, 1), [("03:00", "a", "1"), ("18:00", "a", "2")])
    assert [e.granular_time for e in apply_granularity(day, 1440).entities] == [0, LAST_MINUTE]


def test_slot_formatting():
    assert parse_slot("07:05") == 425
    assert format_slot(425) == "07:05"
    assert slot_interval(15 * 60, 60) == "15:00-16:00"
    assert slot_interval(23 * 60, 60) == "23:00-24:00"
    with pytest.raises(ValueError):
        parse_slot("25:00")
