import json
import math

import pytest

from lifemotif.errors import ConfigError
from lifemotif.ingest import load_dataset
from lifemotif.mining import Group, MiningConfig, Profile
from lifemotif.pipeline import mine_user
from lifemotif.synth import (
    MotifTruth,
    PlantedMotif,
    SynthSpec,
    bundled_spec,
    evaluate_profile,
    generate_dataset,
    write_dataset,
)

ITEMS_A = (("WiFi", "aa:bb:cc:00:00:01"), ("Application", "com.mail"))
ITEMS_B = (("Call", "5550001|outgoing"), ("SMS", "5550002|send"), ("Bluetooth", "car"))


def binomial_quantile(n, p, q):
    """Smallest k with P[X <= k] >= q."""
    acc = 0.0
    for k in range(n + 1):
        acc += math.comb(n, k) * p**k * (1 - p) ** (n - k)
        if acc >= q:
            return k
    return n


def test_binomial_oracle_inside_stated_interval():
    lo, hi = binomial_quantile(60, 0.75, 0.005), binomial_quantile(60, 0.75, 0.995)
    assert (lo, hi) == (36, 53)
    assert 33 <= lo and hi <= 56


def test_degenerate_spec_is_identical_every_day():
    spec = SynthSpec(2, 5, (PlantedMotif(480, ITEMS_A), PlantedMotif(1100, ITEMS_B)), seed=1)
    users, truth = generate_dataset(spec)
    for uid, days in users.items():
        assert len(days) == 5
        shapes = {tuple((e.timestamp.hour, e.timestamp.minute, e.sensor, e.data) for e in d.entities) for d in days}
        assert len(shapes) == 1
        assert all(len(t.fired_days) == 5 for t in truth.users[uid])


@pytest.mark.parametrize("seed", range(5))
def test_fired_days_within_binomial_interval(seed):
    spec = SynthSpec(3, 60, (PlantedMotif(600, ITEMS_A, 0.75),), seed=seed)
    _, truth = generate_dataset(spec)
    for truths in truth.users.values():
        assert 33 <= len(truths[0].fired_days) <= 56


def test_jitter_is_bounded_and_shared_per_firing():
    spec = SynthSpec(1, 30, (PlantedMotif(600, ITEMS_B, 1.0, 10),), seed=4)
    users, _ = generate_dataset(spec)
    for d in users["user000"]:
        minutes = {e.timestamp.hour * 60 + e.timestamp.minute for e in d.entities}
        assert len(minutes) == 1
        assert abs(minutes.pop() - 600) <= 10


def test_dropout_rate():
    spec = SynthSpec(4, 50, (PlantedMotif(600, ITEMS_B, 1.0),), dropout_probability=0.3, seed=9)
    users, _ = generate_dataset(spec)
    kept = sum(len(d.entities) for days in users.values() for d in days)
    rate = 1 - kept / (4 * 50 * 3)
    assert 0.22 < rate < 0.38


def test_noise_identifiers_are_fresh():
    spec = SynthSpec(2, 10, (), noise_entities_per_day=40, seed=2)
    users, _ = generate_dataset(spec)
    ids = [(e.sensor, e.data) for days in users.values() for d in days for e in d.entities]
    assert len(ids) == 2 * 10 * 40
    assert len(set(ids)) == len(ids)
    assert "Activity" not in {s for s, _ in ids}


def test_same_seed_same_bytes(tmp_path):
    spec = bundled_spec("routine")
    for sub in ("a", "b"):
        write_dataset(*generate_dataset(spec), tmp_path / sub)
    for name in ("ground_truth.json", "data/user000.jsonl", "data/user004.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    other = SynthSpec.from_dict({**spec.to_dict(), "seed": spec.seed + 1})
    write_dataset(*generate_dataset(other), tmp_path / "c")
    assert (tmp_path / "a/data/user000.jsonl").read_bytes() != (tmp_path / "c/data/user000.jsonl").read_bytes()


def test_written_dataset_reloads_identically(tmp_path):
    spec = SynthSpec(2, 6, (PlantedMotif(480, ITEMS_A, 0.9, 5),), noise_entities_per_day=10, seed=3)
    users, truth = generate_dataset(spec)
    data_dir = write_dataset(users, truth, tmp_path)
    loaded = load_dataset(data_dir)
    assert sorted(loaded.users) == sorted(users)
    for uid in users:
        assert [d.entities for d in loaded.users[uid]] == [d.entities for d in users[uid]]


def test_spec_round_trip_and_validation(tmp_path):
    spec = bundled_spec("benchmark")
    assert SynthSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    bad = spec.to_dict()
    bad["planted_motifs"][0]["repeat_probability"] = 1.5
    with pytest.raises(ConfigError):
        SynthSpec.from_dict(bad)
    with pytest.raises(ConfigError):
        SynthSpec.from_dict({"num_users": 1})
    with pytest.raises(ConfigError):
        SynthSpec(1, 5, dropout_probability=-0.1)


# -- evaluation -----------------------------------------------------------

def _profile(motifs, theta=2):
    return Profile("u", motifs, MiningConfig(theta, 0.0, 3, 60), 10)


def _truth(slot, items):
    return MotifTruth(0, slot, items, ())


def test_eval_perfect():
    truth = [_truth(480, ITEMS_A)]
    p = _profile([Group(480, frozenset(ITEMS_A), frozenset(), 100.0)])
    r = evaluate_profile(p, truth)
    assert (r.precision, r.recall, r.empty) == (1.0, 1.0, False)


def test_eval_empty_profile():
    r = evaluate_profile(_profile([]), [_truth(480, ITEMS_A)])
    assert (r.precision, r.recall, r.empty) == (1.0, 0.0, True)


def test_eval_partial():
    truth = [_truth(480, ITEMS_A), _truth(900, ITEMS_B), _truth(1200, (("WiFi", "x"), ("SMS", "y")))]
    motifs = [
        Group(480, frozenset(ITEMS_A), frozenset(), 50.0),
        Group(960, frozenset(ITEMS_B[:2]), frozenset(), 50.0),  # one slot off: within tolerance
        Group(300, frozenset({("WiFi", "noise"), ("SMS", "noise")}), frozenset(), 50.0),
    ]
    r = evaluate_profile(_profile(motifs), truth)
    assert r.precision == pytest.approx(2 / 3) and r.recall == pytest.approx(2 / 3)
    assert evaluate_profile(_profile(motifs), truth, match_tolerance_slots=0).recall == pytest.approx(1 / 3)


@pytest.mark.parametrize("g", [5, 15, 30, 60, 90, 120])
def test_recovery_sanity_every_granularity(g):
    motifs = (PlantedMotif(420, ITEMS_A), PlantedMotif(780, ITEMS_B))
    spec = SynthSpec(1, 6, motifs, seed=11)
    users, truth = generate_dataset(spec)
    for theta in (2, 3):
        prof = mine_user(users["user000"], MiningConfig(theta, 0.0, 3, g), location="none")
        relevant = [t for t in truth.users["user000"] if len(t.items) >= theta]
        assert evaluate_profile(prof, relevant).recall == 1.0


def test_granularity_jitter_law():
    """Recall at g >= 2j is at least recall at g < j, averaged over 20 seeds."""
    motifs = (PlantedMotif(420, ITEMS_A, 0.8, 10), PlantedMotif(1020, ITEMS_B, 0.8, 10))
    mean = {}
    for g in (5, 30):
        recalls = []
        for seed in range(20):
            users, truth = generate_dataset(SynthSpec(1, 20, motifs, noise_entities_per_day=20, seed=seed))
            prof = mine_user(users["user000"], MiningConfig(2, 20.0, 3, g), location="none")
            recalls.append(evaluate_profile(prof, truth.users["user000"]).recall)
        mean[g] = sum(recalls) / len(recalls)
    assert mean[30] >= mean[5]
