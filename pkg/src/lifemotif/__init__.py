"""Behavioral motif mining from uncertain, multi-sensor lifelog data."""

from .errors import ConfigError, DataError, GranularityMismatch, InsufficientDataError, MotifError
from .ingest import DayLog, Entity, Rejection, load_dataset, parse_record
from .location import GeoPoint, LocationEvent, estimate_location_states, haversine_distance
from .mining import (
    Behavior,
    Group,
    MiningConfig,
    Profile,
    baseline_profile,
    build_profile,
    compare_days,
    mine_profile,
    mine_windows,
)
from .pipeline import mine_dataset, mine_user, prepare_days
from .analysis import segment_distribution, threshold_sweep, user_feature_vector
from .synth import SynthSpec, evaluate_profile, generate_dataset
from .bench import run_benchmark
from .temporal import GranularityConfig, apply_granularity, snap_time

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "ConfigError",
    "DataError",
    "DayLog",
    "Entity",
    "GeoPoint",
    "GranularityConfig",
    "GranularityMismatch",
    "Group",
    "InsufficientDataError",
    "LocationEvent",
    "MiningConfig",
    "MotifError",
    "Profile",
    "Rejection",
    "SynthSpec",
    "apply_granularity",
    "baseline_profile",
    "build_profile",
    "compare_days",
    "estimate_location_states",
    "evaluate_profile",
    "generate_dataset",
    "haversine_distance",
    "load_dataset",
    "mine_dataset",
    "mine_profile",
    "mine_user",
    "mine_windows",
    "parse_record",
    "prepare_days",
    "run_benchmark",
    "segment_distribution",
    "snap_time",
    "threshold_sweep",
    "user_feature_vector",
]
