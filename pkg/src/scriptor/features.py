"""The 17-feature profile of one task recording, in five categories.

Pressure (Pmin, Pmax, Pavg, Psd, P10, P90) summarizes the pressures of
on-paper samples only. Ductus (Nup, Ndown, Nidle) counts traits by kind.
Time (Tup, Tdown, Tidle, Ttotal) sums trait durations. Space (Sbb, Savg,
Stotal) measures stroke bounding boxes and the empty hops between
consecutive on-paper strokes. Inclination (Iavg) averages the bounding-box
diagonal angles of on-paper strokes.

A category can be undefined for a given recording (e.g. pressure when the
pen never touched paper); undefined features serialize as empty CSV fields
and are excluded listwise from statistics downstream.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields
from statistics import fmean, stdev
from typing import Iterable, NamedTuple, Sequence

from .segmentation import (
    Segmentation,
    TraitCounts,
    TraitKind,
    TraitTimes,
    segment,
    trait_counts,
    trait_times,
)
from .trace import (
    Group,
    RecordingParseError,
    TaskRecording,
    _as_text_stream,
    _coerce_group,
    _coerce_task_id,
)

CATEGORIES: dict[str, tuple[str, ...]] = {
    "pressure": ("Pmin", "Pmax", "Pavg", "Psd", "P10", "P90"),
    "ductus": ("Nup", "Ndown", "Nidle"),
    "time": ("Tup", "Tdown", "Tidle", "Ttotal"),
    "space": ("Sbb", "Savg", "Stotal"),
    "inclination": ("Iavg",),
}

FEATURE_NAMES: tuple[str, ...] = tuple(
    name for names in CATEGORIES.values() for name in names
)

# Features serialized as integers; the rest are floats.
INT_FEATURES = frozenset(
    {"Pmin", "Pmax", "P10", "P90", "Nup", "Ndown", "Nidle", "Tup", "Tdown", "Tidle", "Ttotal"}
)

FEATURE_TABLE_HEADER: tuple[str, ...] = ("participant_id", "group", "task_id") + FEATURE_NAMES


class FeatureUndefinedError(ValueError):
    """The recording has no data for this feature category."""

    def __init__(self, category: str, reason: str):
        self.category = category
        super().__init__(f"{category} features undefined: {reason}")


class PressureFeatures(NamedTuple):
    Pmin: int
    Pmax: int
    Pavg: float
    Psd: float
    P10: int
    P90: int


class SpaceFeatures(NamedTuple):
    Sbb: float
    Savg: float
    Stotal: float


@dataclass(frozen=True)
class FeatureVector:
    """All 17 features of one (participant, task) recording.

    Fields of an undefined category are ``None``. Counts and times are
    integer-exact; space and inclination are floats.
    """

    Pmin: int | None
    Pmax: int | None
    Pavg: float | None
    Psd: float | None
    P10: int | None
    P90: int | None
    Nup: int
    Ndown: int
    Nidle: int
    Tup: int
    Tdown: int
    Tidle: int
    Ttotal: int
    Sbb: float | None
    Savg: float | None
    Stotal: float | None
    Iavg: float | None

    def get(self, name: str):
        return getattr(self, name)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class FeatureRow:
    """One feature-table row: metadata plus the feature vector."""

    participant_id: str
    group: Group
    task_id: int
    features: FeatureVector


def _nearest_rank(sorted_values: Sequence[int], percent: int) -> int:
    """Nearest-rank percentile: the value at 1-based index ceil(q*n).

    Computed in exact integer arithmetic so no float rounding can shift
    the rank.
    """
    n = len(sorted_values)
    index = (percent * n + 99) // 100  # ceil(percent*n/100)
    return sorted_values[max(index, 1) - 1]


def _on_paper_traits(segmentation: Segmentation):
    return [t for t in segmentation.traits if t.kind is TraitKind.ON_PAPER]


def pressure_features(segmentation: Segmentation) -> PressureFeatures:
    """Pressure statistics over on-paper samples only.

    The standard deviation uses the n-1 denominator (0 for a single
    sample); P10/P90 use the nearest-rank definition on the sorted
    multiset.
    """
    pressures = [s.pressure for t in _on_paper_traits(segmentation) for s in t.samples]
    if not pressures:
        raise FeatureUndefinedError("pressure", "no on-paper samples")
    pressures.sort()
    n = len(pressures)
    avg = fmean(pressures)
    sd = stdev(pressures) if n > 1 else 0.0
    return PressureFeatures(
        Pmin=pressures[0],
        Pmax=pressures[-1],
        Pavg=avg,
        Psd=sd,
        P10=_nearest_rank(pressures, 10),
        P90=_nearest_rank(pressures, 90),
    )


def ductus_features(segmentation: Segmentation) -> TraitCounts:
    """Trait counts by kind; see :func:`scriptor.segmentation.trait_counts`."""
    return trait_counts(segmentation)


def time_features(segmentation: Segmentation) -> TraitTimes:
    """Trait time sums by kind; see :func:`scriptor.segmentation.trait_times`."""
    return trait_times(segmentation)


def _bbox(samples) -> tuple[int, int, int, int]:
    xs = [s.x for s in samples]
    ys = [s.y for s in samples]
    return min(xs), min(ys), max(xs), max(ys)


def space_features(segmentation: Segmentation) -> SpaceFeatures:
    """Bounding-box area and inter-stroke hop lengths of on-paper strokes.

    Sbb sums width*height of each stroke's axis-aligned bounding box
    (single-point strokes contribute 0). Stotal sums the straight-line
    distances from the last sample of each on-paper stroke to the first
    sample of the next; Savg is Stotal over the number of hops, 0 when
    there is at most one stroke.
    """
    strokes = _on_paper_traits(segmentation)
    if not strokes:
        raise FeatureUndefinedError("space", "no on-paper traits")
    area = 0
    for t in strokes:
        x0, y0, x1, y1 = _bbox(t.samples)
        area += (x1 - x0) * (y1 - y0)
    hops = []
    for a, b in zip(strokes, strokes[1:]):
        pa = a.samples[-1]
        pb = b.samples[0]
        hops.append(math.hypot(pb.x - pa.x, pb.y - pa.y))
    stotal = math.fsum(hops)
    savg = stotal / (len(strokes) - 1) if len(strokes) > 1 else 0.0
    return SpaceFeatures(Sbb=float(area), Savg=savg, Stotal=stotal)


def inclination_feature(segmentation: Segmentation) -> float:
    """Mean inclination of on-paper stroke bounding-box diagonals, degrees.

    Each stroke contributes atan2(height, width) in [0, 90]; strokes with a
    degenerate (single-point) box are skipped.
    """
    angles = []
    for t in _on_paper_traits(segmentation):
        x0, y0, x1, y1 = _bbox(t.samples)
        w = x1 - x0
        h = y1 - y0
        if w == 0 and h == 0:
            continue
        angles.append(math.degrees(math.atan2(h, w)))
    if not angles:
        raise FeatureUndefinedError(
            "inclination", "no on-paper trait with a non-degenerate bounding box"
        )
    return fmean(angles)


def extract_all(
    recording: TaskRecording, idle_threshold: int | None = None
) -> FeatureVector:
    """Segment ``recording`` and compute all five feature categories.

    A category that is undefined for this recording (no on-paper data)
    yields ``None`` fields instead of failing the others.
    """
    seg = segment(recording, idle_threshold)
    counts = trait_counts(seg)
    times = trait_times(seg)
    values: dict = {
        "Nup": counts.nup,
        "Ndown": counts.ndown,
        "Nidle": counts.nidle,
        "Tup": times.tup,
        "Tdown": times.tdown,
        "Tidle": times.tidle,
        "Ttotal": times.ttotal,
    }
    try:
        values.update(pressure_features(seg)._asdict())
    except FeatureUndefinedError:
        values.update(dict.fromkeys(CATEGORIES["pressure"]))
    try:
        values.update(space_features(seg)._asdict())
    except FeatureUndefinedError:
        values.update(dict.fromkeys(CATEGORIES["space"]))
    try:
        values["Iavg"] = inclination_feature(seg)
    except FeatureUndefinedError:
        values["Iavg"] = None
    return FeatureVector(**values)


def _format_feature(name: str, value) -> str:
    if value is None:
        return ""
    if name in INT_FEATURES:
        return str(value)
    return repr(float(value))


def _parse_feature(name: str, field: str):
    if field == "":
        return None
    return int(field) if name in INT_FEATURES else float(field)


def emit_feature_table(rows: Iterable[FeatureRow]) -> str:
    """Serialize feature rows to the pinned CSV schema (LF endings).

    Undefined features become empty fields; floats use their shortest
    round-trip representation so emit -> parse -> emit is byte-identical.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FEATURE_TABLE_HEADER)
    for row in rows:
        writer.writerow(
            [row.participant_id, row.group.value, row.task_id]
            + [_format_feature(n, row.features.get(n)) for n in FEATURE_NAMES]
        )
    return buf.getvalue()


def read_feature_table(source) -> list[FeatureRow]:
    """Parse a feature-table CSV back into :class:`FeatureRow` objects."""
    stream = _as_text_stream(source)
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        raise RecordingParseError("empty feature table")
    if tuple(h.strip() for h in header) != FEATURE_TABLE_HEADER:
        raise RecordingParseError(
            f"bad feature table header {header!r}", line=1
        )
    rows: list[FeatureRow] = []
    for line_no, record in enumerate(reader, start=2):
        if len(record) != len(FEATURE_TABLE_HEADER):
            raise RecordingParseError(
                f"expected {len(FEATURE_TABLE_HEADER)} columns, got {len(record)}",
                line=line_no,
            )
        participant_id, group_field, task_field = record[0], record[1], record[2]
        try:
            task_id = int(task_field)
        except ValueError:
            raise RecordingParseError(
                f"non-integer task_id {task_field!r}", line=line_no
            ) from None
        try:
            values = {
                name: _parse_feature(name, field)
                for name, field in zip(FEATURE_NAMES, record[3:])
            }
        except ValueError as exc:
            raise RecordingParseError(f"bad field: {exc}", line=line_no) from None
        rows.append(
            FeatureRow(
                participant_id=participant_id,
                group=_coerce_group(group_field, line_no),
                task_id=_coerce_task_id(task_id, line_no),
                features=FeatureVector(**values),
            )
        )
    return rows


def write_feature_table(rows: Sequence[FeatureRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(emit_feature_table(rows))


def read_feature_table_file(path) -> list[FeatureRow]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return read_feature_table(fh)
