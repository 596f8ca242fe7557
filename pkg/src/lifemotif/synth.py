"""Synthetic multi-sensor lifelogs with planted routine motifs.

Every user gets the same list of planted motifs.  On each day a motif fires
with its repeat probability; when it fires, all of its items are stamped at
the motif slot shifted by one shared offset drawn uniformly from
``[-jitter, +jitter]`` minutes, and each item is then dropped independently
with the dropout probability.  Noise entities are spread uniformly over the
day.  Users draw from independent sub-seeds of ``(seed, user_index)`` so the
output does not depend on generation order.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .ingest import ACTIVITY_VALUES, DayLog, Entity, bucket_days, write_canonical
from .mining import Item, Profile
from .temporal import LAST_MINUTE, snap_minute

# relative instance counts per sensor in a real multi-month lifelog corpus
DEFAULT_SENSOR_MIX = {
    "WiFi": 7_640_189,
    "Application": 753_702,
    "Bluetooth": 117_236,
    "Call": 97_654,
    "SMS": 28_486,
    "Activity": 15_641,
}

_SPEC_DIR = Path(__file__).with_name("specs")


@dataclass(frozen=True)
class PlantedMotif:
    slot_minute: int
    items: tuple[Item, ...]
    repeat_probability: float = 1.0
    jitter_minutes: int = 0

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(tuple(i) for i in self.items))
        if not 0 <= self.slot_minute <= LAST_MINUTE:
            raise ConfigError(f"slot_minute out of range: {self.slot_minute}")
        if not self.items:
            raise ConfigError("a planted motif needs at least one item")
        if not 0.0 <= self.repeat_probability <= 1.0:
            raise ConfigError(f"repeat_probability must be in [0, 1], got {self.repeat_probability}")
        if self.jitter_minutes < 0:
            raise ConfigError("jitter_minutes must be >= 0")


@dataclass(frozen=True)
class SynthSpec:
    num_users: int
    num_days: int
    planted_motifs: tuple[PlantedMotif, ...] = ()
    noise_entities_per_day: int = 0
    dropout_probability: float = 0.0
    seed: int = 0
    start_date: date = date(2014, 1, 6)
    recurrent_noise: int = 0  # >0: noise ids drawn from a per-user vocabulary of this size
    sensor_mix: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_SENSOR_MIX))

    def __post_init__(self):
        object.__setattr__(self, "planted_motifs", tuple(self.planted_motifs))
        if self.num_users < 1:
            raise ConfigError("num_users must be >= 1")
        if self.num_days < 2:
            raise ConfigError("num_days must be >= 2")
        if self.noise_entities_per_day < 0 or self.recurrent_noise < 0:
            raise ConfigError("noise counts must be >= 0")
        if not 0.0 <= self.dropout_probability <= 1.0:
            raise ConfigError(f"dropout_probability must be in [0, 1], got {self.dropout_probability}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not self.sensor_mix or any(v < 0 for v in self.sensor_mix.values()):
            raise ConfigError("sensor_mix must have non-negative weights")

    @classmethod
    def from_dict(cls, d: Mapping) -> "SynthSpec":
        d = dict(d)
        try:
            motifs = tuple(
                PlantedMotif(
                    int(m["slot_minute"]),
                    tuple((i["sensor"], i["data"]) if isinstance(i, Mapping) else tuple(i) for i in m["items"]),
                    float(m.get("repeat_probability", 1.0)),
                    int(m.get("jitter_minutes", 0)),
                )
                for m in d.pop("planted_motifs", ())
            )
            if "start_date" in d:
                d["start_date"] = date.fromisoformat(d["start_date"])
            return cls(planted_motifs=motifs, **d)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid synth spec: {exc}") from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "SynthSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["start_date"] = self.start_date.isoformat()
        d["planted_motifs"] = [
            {
                "slot_minute": m.slot_minute,
                "items": [{"sensor": s, "data": v} for s, v in m.items],
                "repeat_probability": m.repeat_probability,
                "jitter_minutes": m.jitter_minutes,
            }
            for m in self.planted_motifs
        ]
        d["sensor_mix"] = dict(self.sensor_mix)
        return d


def bundled_spec(name: str) -> SynthSpec:
    """Load one of the packaged specs (``benchmark`` or ``routine``)."""
    return SynthSpec.from_json(_SPEC_DIR / f"{name}.json")


@dataclass(frozen=True)
class MotifTruth:
    motif_index: int
    slot_minute: int
    items: tuple[Item, ...]
    fired_days: tuple[date, ...]


@dataclass
class GroundTruth:
    users: dict[str, list[MotifTruth]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            u: [
                {
                    "motif_index": t.motif_index,
                    "slot_minute": t.slot_minute,
                    "items": [{"sensor": s, "data": v} for s, v in t.items],
                    "fired_days": [d.isoformat() for d in t.fired_days],
                }
                for t in truths
            ]
            for u, truths in self.users.items()
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GroundTruth":
        return cls(
            {
                u: [
                    MotifTruth(
                        int(t["motif_index"]),
                        int(t["slot_minute"]),
                        tuple((i["sensor"], i["data"]) for i in t["items"]),
                        tuple(date.fromisoformat(x) for x in t["fired_days"]),
                    )
                    for t in truths
                ]
                for u, truths in d.items()
            }
        )


def user_id_for(index: int) -> str:
    return f"user{index:03d}"


def _noise_identifier(sensor: str, token: int) -> str:
    if sensor in ("WiFi", "Bluetooth"):
        return ":".join(f"{(token >> s) & 0xFF:02x}" for s in (40, 32, 24, 16, 8, 0))
    if sensor in ("Call", "SMS"):
        return f"9{token:09d}|{'incoming' if token % 2 else 'outgoing'}"
    if sensor == "Application":
        return f"com.noise.app{token}"
    return ACTIVITY_VALUES[token % len(ACTIVITY_VALUES)]


def _generate_user(spec: SynthSpec, index: int) -> tuple[list[DayLog], list[MotifTruth]]:
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, index]))
    uid = user_id_for(index)

    sensors = [s for s, w in spec.sensor_mix.items() if w > 0]
    if not spec.recurrent_noise:
        # a finite label set cannot produce fresh identifiers
        sensors = [s for s in sensors if s != "Activity"]
    weights = np.array([spec.sensor_mix[s] for s in sensors], dtype=float)
    weights /= weights.sum()
    # user tag keeps fresh noise ids distinct across users too
    token_base = (index + 1) << 32
    token = 0

    entities: list[Entity] = []
    fired: list[list[date]] = [[] for _ in spec.planted_motifs]
    for day_idx in range(spec.num_days):
        day = spec.start_date + timedelta(days=day_idx)
        midnight = datetime.combine(day, datetime.min.time())
        for m_idx, motif in enumerate(spec.planted_motifs):
            if rng.random() >= motif.repeat_probability:
                continue
            fired[m_idx].append(day)
            j = int(motif.jitter_minutes)
            offset = int(rng.integers(-j, j + 1)) if j else 0
            minute = min(max(motif.slot_minute + offset, 0), LAST_MINUTE)
            for sensor, data in motif.items:
                if spec.dropout_probability and rng.random() < spec.dropout_probability:
                    continue
                second = int(rng.integers(0, 60)) if j else 0
                entities.append(Entity(midnight + timedelta(minutes=minute, seconds=second), sensor, data))
        if spec.noise_entities_per_day:
            n = spec.noise_entities_per_day
            picks = rng.choice(len(sensors), size=n, p=weights)
            seconds = rng.integers(0, 86_400, size=n)
            vocab = rng.integers(0, spec.recurrent_noise, size=n) if spec.recurrent_noise else None
            for k in range(n):
                if vocab is not None:
                    ident = _noise_identifier(sensors[picks[k]], token_base + int(vocab[k]))
                else:
                    ident = _noise_identifier(sensors[picks[k]], token_base + token)
                    token += 1
                entities.append(Entity(midnight + timedelta(seconds=int(seconds[k])), sensors[picks[k]], ident))

    # days without any entity are not observed days and are not emitted
    days = bucket_days(uid, entities)
    truths = [
        MotifTruth(i, m.slot_minute, m.items, tuple(fired[i])) for i, m in enumerate(spec.planted_motifs)
    ]
    return days, truths


def generate_dataset(spec: SynthSpec) -> tuple[dict[str, list[DayLog]], GroundTruth]:
    """Generate per-user day logs and the planted-motif ground truth."""
    users: dict[str, list[DayLog]] = {}
    truth = GroundTruth()
    for index in range(spec.num_users):
        days, truths = _generate_user(spec, index)
        uid = user_id_for(index)
        users[uid] = days
        truth.users[uid] = truths
    return users, truth


def write_dataset(users: Mapping[str, Sequence[DayLog]], truth: GroundTruth, out_dir: str | Path) -> Path:
    """Write ``data/<user>.jsonl`` and ``ground_truth.json`` under ``out_dir``."""
    out = Path(out_dir)
    data_dir = out / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    for uid in sorted(users):
        write_canonical(users[uid], data_dir / f"{uid}.jsonl")
    with open(out / "ground_truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return data_dir


@dataclass(frozen=True)
class EvalResult:
    precision: float
    recall: float
    matched_motifs: int
    total_motifs: int
    recovered: int
    planted: int
    empty: bool = False


def evaluate_profile(
    profile: Profile,
    truth: Sequence[MotifTruth],
    match_tolerance_slots: int = 1,
    theta: int | None = None,
) -> EvalResult:
    """Precision/recall of a mined profile against the planted motifs of one user.

    A profile motif matches a planted motif when its items are a subset (of
    size at least ``theta``) of the planted items and its slot lies within
    ``match_tolerance_slots`` grid cells of the snapped planted slot.
    """
    theta = profile.config.theta if theta is None else theta
    precision_min = profile.config.precision
    reach = match_tolerance_slots * precision_min

    def matches(motif, planted: MotifTruth) -> bool:
        if len(motif.items) < theta or not motif.items <= set(planted.items):
            return False
        return abs(motif.slot - snap_minute(planted.slot_minute, precision_min)) <= reach

    matched = sum(1 for m in profile.motifs if any(matches(m, t) for t in truth))
    recovered = sum(1 for t in truth if any(matches(m, t) for m in profile.motifs))
    total = len(profile.motifs)
    planted = len(truth)
    return EvalResult(
        precision=matched / total if total else 1.0,
        recall=recovered / planted if planted else 1.0,
        matched_motifs=matched,
        total_motifs=total,
        recovered=recovered,
        planted=planted,
        empty=total == 0,
    )
