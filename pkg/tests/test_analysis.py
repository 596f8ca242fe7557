import csv
from datetime import date

import pytest

from conftest import consecutive_dates, make_day
from lifemotif.analysis import (
    DEFAULT_SEGMENTS,
    DaySegment,
    segment_distribution,
    segment_of,
    threshold_sweep,
    user_feature_vector,
    validate_segments,
    write_features_csv,
    write_sweep_csv,
)
from lifemotif.errors import ConfigError
from lifemotif.mining import Group, MiningConfig, Profile, mine_profile
from lifemotif.pipeline import prepare_days


def profile_with(slots_conf):
    cfg = MiningConfig(2, 0.0, 3, 60)
    motifs = [Group(s, frozenset({("WiFi", f"w{s}")}), frozenset({date(2014, 1, 6)}), c) for s, c in slots_conf]
    return Profile("u", motifs, cfg, 10)


def test_segment_boundaries():
    assert segment_of(180).label == "0-8"
    assert segment_of(480).label == "8-16"
    assert segment_of(479).label == "0-8"
    assert segment_of(1439).label == "16-24"


def test_distribution_and_feature_vector():
    p = profile_with([(180, 10.0), (180, 20.0), (540, 50.0), (1200, 19.99)])
    assert segment_distribution(p) == {"0-8": 2, "8-16": 1, "16-24": 1}
    assert user_feature_vector(p).counts == (1, 1, 0, 1, 1, 0)


def test_empty_profile():
    p = profile_with([])
    assert segment_distribution(p) == {"0-8": 0, "8-16": 0, "16-24": 0}
    assert user_feature_vector(p).counts == (0,) * 6


def test_invalid_segments():
    with pytest.raises(ConfigError):
        validate_segments([DaySegment("a", 0, 600), DaySegment("b", 500, 1440)])
    with pytest.raises(ConfigError):
        validate_segments([DaySegment("a", 0, 600)])
    with pytest.raises(ConfigError):
        DaySegment("bad", 600, 600)
    validate_segments(list(reversed(DEFAULT_SEGMENTS)))


def _routine_days(n=8):
    days = []
    for i, d in enumerate(consecutive_dates(n)):
        entries = [("07:00", "WiFi", "home"), ("07:05", "Application", "news"), ("07:10", "SMS", "m|send")]
        if i % 2:
            entries.append(("12:00", "Call", "1|incoming"))
            entries.append(("12:05", "WiFi", "canteen"))
        entries.append(("22:00", "Application", f"noise{i}"))
        days.append(make_day(d, entries))
    return days


def test_sweep_grid_and_equivalence():
    days = _routine_days()
    rows = threshold_sweep(days, [1, 2], [0.0, 40.0], [60], window_size=3)
    assert len(rows) == 4
    assert {(r.theta, r.lambda_pct) for r in rows} == {(1, 0.0), (1, 40.0), (2, 0.0), (2, 40.0)}
    for r in rows:
        independent = mine_profile(prepare_days(days, 60, "none"), MiningConfig(r.theta, r.lambda_pct, 3, 60))
        assert r.motif_count == len(independent.motifs)
        assert r.mean_per_user == r.motif_count


def test_sweep_monotone():
    days = _routine_days(12)
    rows = threshold_sweep({"a": days, "b": days[2:]}, [1, 2, 3, 4], [0, 20, 40, 60], [30, 60])
    counts = {(r.theta, r.lambda_pct, r.granularity): r.motif_count for r in rows}
    for (t, l, g), c in counts.items():
        if (t + 1, l, g) in counts:
            assert counts[(t + 1, l, g)] <= c
        if (t, l + 20, g) in counts:
            assert counts[(t, l + 20, g)] <= c
    assert all(r.users == 2 for r in rows)


def test_sweep_failed_cell_is_na(tmp_path):
    rows = threshold_sweep(_routine_days(1), [1], [0.0, 20.0], [60])
    assert [r.motif_count for r in rows] == [None, None]
    write_sweep_csv(rows, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "theta,lambda,granularity,motif_count,mean_per_user"
    assert lines[1] == "1,0,60,NA,NA"


def test_sweep_empty_grid():
    with pytest.raises(ConfigError):
        threshold_sweep(_routine_days(), [], [0.0], [60])


def test_features_csv(tmp_path):
    write_features_csv([profile_with([(180, 25.0)])], tmp_path / "f.csv")
    rows = list(csv.reader(open(tmp_path / "f.csv")))
    assert rows == [["user_id", "t1", "t2", "t3", "t4", "t5", "t6"], ["u", "0", "1", "0", "0", "0", "0"]]
