"""Command-line entry point: ``lifemotif <subcommand> ...``.

Exit codes: 0 on success, 1 for data errors, 2 for usage errors (bad flags,
missing inputs).  Set ``LIFEMOTIF_LOG=DEBUG`` (or INFO, WARNING) for logs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import threshold_sweep, write_features_csv, write_segments_csv, write_sweep_csv
from .bench import fit_exponent, run_benchmark, write_bench_csv
from .errors import ConfigError, DataError, MotifError
from .ingest import DEFAULT_WEEKEND_DAYS, load_dataset, write_canonical, write_rejections
from .mining import MiningConfig, Profile
from .pipeline import LOCATION_MODES, mine_dataset, prepare_days
from .synth import GroundTruth, SynthSpec, bundled_spec, evaluate_profile, generate_dataset, write_dataset

log = logging.getLogger("lifemotif")

_WEEKDAYS = {"mon": 0, "tue": 1, "wed": 2, "thu": 3, "fri": 4, "sat": 5, "sun": 6}


class UsageError(MotifError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _weekdays(text: str) -> frozenset[int]:
    out = set()
    for tok in text.lower().split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.isdigit() and int(tok) < 7:
            out.add(int(tok))
        elif tok[:3] in _WEEKDAYS:
            out.add(_WEEKDAYS[tok[:3]])
        else:
            raise argparse.ArgumentTypeError(f"unknown weekday {tok!r}")
    return frozenset(out)


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", required=True, help="dataset directory (one file or folder per user)")
    p.add_argument("--format", choices=("auto", "ubiqlog", "generic"), default="auto")
    p.add_argument("--tz-offset", type=int, default=0, help="dataset UTC offset in minutes (default 0)")
    p.add_argument("--exclude-weekend", action="store_true", help="drop weekend days before mining")
    p.add_argument(
        "--weekend-days", type=_weekdays, default=DEFAULT_WEEKEND_DAYS, help="comma list, e.g. fri or sat,sun"
    )


def _add_mining_flags(p: argparse.ArgumentParser, *, config_file: bool = True) -> None:
    if config_file:
        p.add_argument("--config", help="JSON file with theta/lambda/window/granularity defaults")
    p.add_argument("--granularity", type=int, default=None, help="temporal precision in minutes (default 60)")
    p.add_argument("--theta", type=int, default=None, help="activity threshold (default 2)")
    p.add_argument("--lambda", dest="lambda_pct", type=float, default=None, help="confidence threshold %% (default 20)")
    p.add_argument("--window", type=int, default=None, help="sliding window size in days (default 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lifemotif", description="Behavioral motif mining for lifelog data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse raw logs into canonical JSON lines")
    _add_input_flags(p)
    p.add_argument("--out", required=True, help="output directory for <user>.jsonl files")
    p.add_argument("--location", choices=LOCATION_MODES, default="fused", help="annotate location states")
    p.add_argument("--rejections", help="CSV path for rejected lines (default <out>/rejections.csv)")

    p = sub.add_parser("mine", help="mine one profile per user")
    _add_input_flags(p)
    _add_mining_flags(p)
    p.add_argument("--location", choices=LOCATION_MODES, default="fused")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory for <user>.json profiles")

    p = sub.add_parser("sweep", help="motif counts over a theta x lambda x granularity grid")
    _add_input_flags(p)
    p.add_argument("--thetas", type=_int_list, default=[1, 2, 3, 4])
    p.add_argument("--lambdas", type=_float_list, default=[0.0, 20.0, 40.0, 60.0])
    p.add_argument("--granularities", type=_int_list, default=[5, 15, 30, 60, 90, 120])
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--location", choices=LOCATION_MODES, default="fused")
    p.add_argument("--out", required=True, help="sweep CSV path")

    p = sub.add_parser("segments", help="day-segment counts and six-term feature vectors")
    p.add_argument("--profiles", required=True, help="directory of profile JSON files")
    p.add_argument("--out", required=True, help="output directory for segments.csv and features.csv")

    p = sub.add_parser("synth", help="generate a synthetic dataset with ground truth")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="SynthSpec JSON file")
    src.add_argument("--preset", choices=("routine", "benchmark"))
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.add_argument("--out", required=True, help="output directory (data/ and ground_truth.json)")

    p = sub.add_parser("bench", help="window-size vs execution-time benchmark")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--synth-spec", help="SynthSpec JSON file to generate the benchmark data")
    src.add_argument("--preset", choices=("benchmark", "routine"))
    src.add_argument("--in", dest="input", help="dataset directory instead of synthetic data")
    p.add_argument("--days", type=_int_list, default=[10, 20, 30, 40, 50, 60])
    p.add_argument("--windows", type=_int_list, default=[2, 3, 4, 6])
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--granularity", type=int, default=60)
    p.add_argument("--theta", type=int, default=2)
    p.add_argument("--threads", type=int, default=1, help="parallel per-user mining (timed as such)")
    p.add_argument("--out", required=True, help="bench CSV path")

    p = sub.add_parser("eval", help="precision/recall of profiles against ground truth")
    p.add_argument("--profiles", required=True)
    p.add_argument("--truth", required=True, help="ground_truth.json written by synth")
    p.add_argument("--tolerance", type=int, default=1, help="slot tolerance in grid cells")
    p.add_argument("--out", help="optional CSV path with per-user results")
    return parser


def _require_dir(path: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise UsageError(f"input directory not found: {path}")
    return p


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    return p


def _load(args):
    ds = load_dataset(
        _require_dir(args.input),
        source_format=args.format,
        exclude_weekend=args.exclude_weekend,
        weekend_days=args.weekend_days,
        tz_offset_minutes=args.tz_offset,
    )
    if not ds.users:
        raise DataError("no users found")
    if ds.rejections:
        log.warning("%d line(s) rejected", len(ds.rejections))
    return ds


def _mining_config(args) -> MiningConfig:
    base = {"theta": 2, "lambda": 20.0, "window": 3, "granularity": 60}
    if getattr(args, "config", None):
        with open(_require_file(args.config), encoding="utf-8") as fh:
            base.update(json.load(fh))
    flags = {"theta": args.theta, "lambda": args.lambda_pct, "window": args.window, "granularity": args.granularity}
    base.update({k: v for k, v in flags.items() if v is not None})
    return MiningConfig.from_dict(base)


def cmd_ingest(args) -> int:
    ds = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    total = 0
    for uid, days in ds.users.items():
        if args.location != "none":
            from .location import annotate_day, estimate_location_states

            days = [annotate_day(d, estimate_location_states(d.entities, args.location)) if d.entities else d for d in days]
        total += write_canonical(days, out / f"{uid}.jsonl", args.tz_offset)
    write_rejections(ds.rejections, args.rejections or out / "rejections.csv")
    print(f"{len(ds.users)} user(s), {total} entities written, {len(ds.rejections)} rejected")
    return 0


def cmd_mine(args) -> int:
    cfg = _mining_config(args)
    ds = _load(args)
    usable = {u: d for u, d in ds.users.items() if len(d) >= 2}
    for u in sorted(set(ds.users) - set(usable)):
        log.warning("user %s skipped: fewer than 2 days", u)
    if not usable:
        raise DataError("no user has at least 2 days of data")
    profiles = mine_dataset(usable, cfg, args.location, args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for uid, prof in profiles.items():
        (out / f"{uid}.json").write_text(prof.to_json(), encoding="utf-8")
    print(f"{len(profiles)} profile(s), {sum(len(p.motifs) for p in profiles.values())} motif(s) -> {out}")
    return 0


def cmd_sweep(args) -> int:
    ds = _load(args)
    rows = threshold_sweep(
        ds.users, args.thetas, args.lambdas, args.granularities, window_size=args.window, location=args.location
    )
    write_sweep_csv(rows, args.out)
    print(f"{len(rows)} sweep row(s) -> {args.out}")
    return 0


def _load_profiles(path: str) -> list[Profile]:
    files = sorted(_require_dir(path).glob("*.json"))
    if not files:
        raise DataError(f"no profile JSON files in {path}")
    profiles = []
    for f in files:
        try:
            profiles.append(Profile.from_dict(json.loads(f.read_text(encoding="utf-8"))))
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"bad profile {f}: {exc}") from exc
    return profiles


def cmd_segments(args) -> int:
    profiles = _load_profiles(args.profiles)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_segments_csv(profiles, out / "segments.csv")
    write_features_csv(profiles, out / "features.csv")
    print(f"{len(profiles)} profile(s) -> {out}/segments.csv, {out}/features.csv")
    return 0


def _spec_from_args(args, path_attr: str) -> SynthSpec:
    path = getattr(args, path_attr)
    spec = SynthSpec.from_json(_require_file(path)) if path else bundled_spec(args.preset)
    if getattr(args, "seed", None) is not None:
        spec = SynthSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    return spec


def cmd_synth(args) -> int:
    spec = _spec_from_args(args, "spec")
    users, truth = generate_dataset(spec)
    data_dir = write_dataset(users, truth, args.out)
    with open(Path(args.out) / "spec.json", "w", encoding="utf-8") as fh:
        json.dump(spec.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"{len(users)} user(s) x {spec.num_days} day(s) -> {data_dir}")
    return 0


def cmd_bench(args) -> int:
    if args.input:
        ds = load_dataset(_require_dir(args.input))
        users = ds.users
        if not users:
            raise DataError("no users found")
    else:
        users, _ = generate_dataset(_spec_from_args(args, "synth_spec"))
    prepared = {u: prepare_days(d, args.granularity, "none") for u, d in users.items()}
    rows = run_benchmark(
        prepared, args.days, args.windows, repetitions=args.repetitions, theta=args.theta, threads=args.threads
    )
    write_bench_csv(rows, args.out)
    for w in [*args.windows, "baseline"]:
        print(f"window={w}: log-log time exponent {fit_exponent(rows, w):.2f}")
    print(f"{len(rows)} row(s) -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    profiles = _load_profiles(args.profiles)
    with open(_require_file(args.truth), encoding="utf-8") as fh:
        truth = GroundTruth.from_dict(json.load(fh))
    results = []
    for p in profiles:
        if p.user_id not in truth.users:
            log.warning("no ground truth for user %s", p.user_id)
            continue
        results.append((p.user_id, evaluate_profile(p, truth.users[p.user_id], args.tolerance)))
    if not results:
        raise DataError("no profile matches a ground-truth user")
    if args.out:
        import csv

        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["user_id", "precision", "recall", "motifs", "planted", "empty"])
            for uid, r in results:
                w.writerow([uid, f"{r.precision:.4f}", f"{r.recall:.4f}", r.total_motifs, r.planted, int(r.empty)])
    mp = sum(r.precision for _, r in results) / len(results)
    mr = sum(r.recall for _, r in results) / len(results)
    print(f"users={len(results)} mean_precision={mp:.4f} mean_recall={mr:.4f}")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "mine": cmd_mine,
    "sweep": cmd_sweep,
    "segments": cmd_segments,
    "synth": cmd_synth,
    "bench": cmd_bench,
    "eval": cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("LIFEMOTIF_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except MotifError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
