"""Command-line entry point: extract, analyze, synth, report.

Every flag can also be set via an environment variable with the
``SCRIPTOR_`` prefix (e.g. ``SCRIPTOR_IDLE_THRESHOLD_MS=32``); explicit
flags win. All diagnostics go to stderr; data goes to the requested files
(or stdout where noted). Commands exit 0 iff no errors were logged.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__
from .features import extract_all, read_feature_table_file, write_feature_table, FeatureRow
from .report import render_text
from .segmentation import segment, traits_to_csv
from .stats import CohortTable, analyze_cohort
from .synth import (
    cohort_spec_from_dict,
    cohort_spec_to_dict,
    default_cohort_spec,
    generate_cohort,
    write_cohort,
)
from .trace import (
    DEFAULT_PERIOD_MS,
    DEFAULT_PRESSURE_MAX,
    read_manifest,
    read_recording,
)

logger = logging.getLogger("scriptor")

ENV_PREFIX = "SCRIPTOR_"


@dataclass(frozen=True)
class RunConfig:
    """Resolved runtime options shared by the pipeline commands."""

    idle_threshold_ms: int = 24
    pressure_max: int = DEFAULT_PRESSURE_MAX
    period_ms: int = DEFAULT_PERIOD_MS
    alpha: float = 0.05
    fmt: str = "text"
    seed: int | None = None

    def __post_init__(self):
        if self.idle_threshold_ms <= 0:
            raise ValueError("idle threshold must be positive")
        if self.pressure_max <= 0:
            raise ValueError("pressure_max must be positive")
        if self.period_ms <= 0:
            raise ValueError("period must be positive")


def _env(name: str, cast, fallback):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        logger.warning("ignoring bad %s%s=%r", ENV_PREFIX, name, raw)
        return fallback


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--idle-threshold-ms",
        type=int,
        default=_env("IDLE_THRESHOLD_MS", int, 24),
        help="gap length above which the pen counts as idle (default 24)",
    )
    parser.add_argument(
        "--pressure-max",
        type=int,
        default=_env("PRESSURE_MAX", int, DEFAULT_PRESSURE_MAX),
        help="upper bound of the device pressure range (default 1023)",
    )
    parser.add_argument(
        "--period-ms",
        type=int,
        default=_env("PERIOD_MS", int, DEFAULT_PERIOD_MS),
        help="nominal sampling period in ms (default 8)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scriptor",
        description="Pen-recording feature extraction and group analysis",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="compute the feature table for a manifest")
    p_extract.add_argument("--manifest", required=True, help="manifest CSV path")
    p_extract.add_argument("--out", required=True, help="feature table CSV to write")
    p_extract.add_argument(
        "--dump-traits",
        metavar="DIR",
        default=None,
        help="also write per-recording trait CSVs into DIR",
    )
    _add_common_flags(p_extract)

    p_analyze = sub.add_parser("analyze", help="run the group-comparison protocol")
    p_analyze.add_argument("--features", required=True, help="feature table CSV path")
    p_analyze.add_argument("--out", default=None, help="output path (default: stdout)")
    p_analyze.add_argument(
        "--format",
        choices=("text", "json"),
        default=_env("FORMAT", str, "text"),
        help="report format (default text)",
    )
    p_analyze.add_argument(
        "--alpha",
        type=float,
        default=_env("ALPHA", float, 0.05),
        help="significance level (default 0.05)",
    )

    p_synth = sub.add_parser("synth", help="generate a synthetic cohort")
    p_synth.add_argument("--spec", default=None, help="cohort spec JSON (default: demo cohort)")
    p_synth.add_argument("--out-dir", required=True, help="directory for recordings + manifest")
    p_synth.add_argument(
        "--seed",
        type=int,
        default=_env("SEED", int, None),
        help="override the spec's RNG seed",
    )

    p_report = sub.add_parser("report", help="render an analysis JSON as text tables")
    p_report.add_argument("--analysis", required=True, help="analysis JSON path")
    p_report.add_argument("--out", default=None, help="output path (default: stdout)")

    return parser


def _write_or_print(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_extract(args) -> int:
    config = RunConfig(
        idle_threshold_ms=args.idle_threshold_ms,
        pressure_max=args.pressure_max,
        period_ms=args.period_ms,
    )
    manifest_path = Path(args.manifest)
    try:
        with open(manifest_path, "r", encoding="utf-8", newline="") as fh:
            entries = read_manifest(fh)
    except (OSError, ValueError) as exc:
        logger.error("cannot read manifest %s: %s", manifest_path, exc)
        return 1
    dump_dir = Path(args.dump_traits) if args.dump_traits else None
    if dump_dir:
        dump_dir.mkdir(parents=True, exist_ok=True)

    rows: list[FeatureRow] = []
    failures = 0
    for entry in entries:
        path = manifest_path.parent / entry.file
        try:
            recording = read_recording(
                path,
                participant_id=entry.participant_id,
                task_id=entry.task_id,
                group=entry.group,
                nominal_period=config.period_ms,
                pressure_max=config.pressure_max,
            )
            features = extract_all(recording, config.idle_threshold_ms)
        except (OSError, ValueError) as exc:
            logger.error("%s: %s", entry.file, exc)
            failures += 1
            continue
        rows.append(
            FeatureRow(
                participant_id=entry.participant_id,
                group=entry.group,
                task_id=entry.task_id,
                features=features,
            )
        )
        if dump_dir:
            seg = segment(recording, config.idle_threshold_ms)
            name = f"{entry.participant_id}_task{entry.task_id}_traits.csv"
            (dump_dir / name).write_text(traits_to_csv(seg), encoding="utf-8")
    write_feature_table(rows, args.out)
    logger.info("wrote %d feature row(s) to %s", len(rows), args.out)
    if failures:
        logger.error("%d recording(s) failed", failures)
        return 1
    return 0


def cmd_analyze(args) -> int:
    try:
        rows = read_feature_table_file(args.features)
        cohort = CohortTable.from_rows(rows)
    except (OSError, ValueError) as exc:
        logger.error("cannot load feature table %s: %s", args.features, exc)
        return 1
    groups = {row.group for row in cohort.rows}
    if len(groups) < 2:
        logger.error("need at least 2 groups to analyze, found %d", len(groups))
        return 1
    result = analyze_cohort(cohort, alpha=args.alpha)
    document = result.to_dict()
    if args.format == "json":
        _write_or_print(json.dumps(document, indent=2) + "\n", args.out)
    else:
        _write_or_print(render_text(document), args.out)
    return 0


def cmd_synth(args) -> int:
    if args.spec is None:
        spec = default_cohort_spec()
    else:
        try:
            data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
            spec = cohort_spec_from_dict(data)
        except (OSError, ValueError) as exc:
            logger.error("cannot load cohort spec %s: %s", args.spec, exc)
            return 1
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    try:
        recordings = generate_cohort(spec)
    except ValueError as exc:
        logger.error("cannot generate cohort: %s", exc)
        return 1
    manifest_path = write_cohort(recordings, args.out_dir)
    spec_path = Path(args.out_dir) / "cohort_spec.json"
    spec_path.write_text(
        json.dumps(cohort_spec_to_dict(spec), indent=2) + "\n", encoding="utf-8"
    )
    logger.info(
        "wrote %d recording(s) and %s", len(recordings), manifest_path
    )
    return 0


def cmd_report(args) -> int:
    try:
        document = json.loads(Path(args.analysis).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        logger.error("cannot load analysis %s: %s", args.analysis, exc)
        return 1
    if not isinstance(document, dict):
        logger.error("analysis %s: expected a JSON object at the top level", args.analysis)
        return 1
    _write_or_print(render_text(document), args.out)
    return 0


_COMMANDS = {
    "extract": cmd_extract,
    "analyze": cmd_analyze,
    "synth": cmd_synth,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
