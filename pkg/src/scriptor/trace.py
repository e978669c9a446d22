"""Pen sample stream model: parsing, validation, and CSV round-tripping.

A recording is a sequence of fixed-rate digitizer samples (position, pen
status, tilt angles, pressure) captured every ``nominal_period`` ms while a
participant performs one drawing or handwriting task. Recordings travel as
UTF-8 CSV files with the header ``t_ms,x,y,status,azimuth,altitude,pressure``
and LF line endings; a manifest CSV maps recording files to participant,
group, and task metadata.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence, TextIO, Union

RECORDING_HEADER = ("t_ms", "x", "y", "status", "azimuth", "altitude", "pressure")
MANIFEST_HEADER = ("file", "participant_id", "group", "task_id")

DEFAULT_PERIOD_MS = 8
DEFAULT_PRESSURE_MAX = 1023

STATUS_IN_AIR = 0
STATUS_ON_PAPER = 1

TASK_IDS = (1, 2, 3, 4)


class Group(str, Enum):
    """Participant group label carried through every pipeline stage."""

    CL = "CL"
    SEV = "SEV"
    NOR = "NOR"


class RecordingParseError(ValueError):
    """Structurally malformed recording or manifest input (bad header,
    wrong column count, non-integer field)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RecordingDomainError(ValueError):
    """A field parsed fine but its value is outside the allowed domain."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PenSample(NamedTuple):
    """One acquisition record: where the pen was at time ``t``.

    ``status`` is 1 while the tip touches the surface, 0 while hovering.
    ``azimuth`` and ``altitude`` are pass-through device metadata; no
    downstream computation consumes them.
    """

    t: int
    x: int
    y: int
    status: int
    azimuth: int
    altitude: int
    pressure: int


@dataclass(frozen=True)
class TaskRecording:
    """All samples of one (participant, task) acquisition, in file order."""

    participant_id: str
    task_id: int
    group: Group
    samples: tuple[PenSample, ...]
    nominal_period: int = DEFAULT_PERIOD_MS


@dataclass(frozen=True)
class ManifestEntry:
    file: str
    participant_id: str
    group: Group
    task_id: int


@dataclass(frozen=True)
class Violation:
    """One validation finding, anchored at a sample index."""

    kind: str
    index: int
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Report-only result of :func:`validate_recording`; never mutates input."""

    violations: tuple[Violation, ...]
    gap_deviation_fraction: float

    @property
    def ok(self) -> bool:
        return not self.violations and self.gap_deviation_fraction == 0.0


Source = Union[str, bytes, TextIO]


def _as_text_stream(source: Source) -> TextIO:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def _coerce_group(group: Group | str, line: int | None = None) -> Group:
    try:
        return Group(group)
    except ValueError:
        raise RecordingDomainError(
            f"unknown group {group!r} (expected one of CL, SEV, NOR)", line
        ) from None


def _coerce_task_id(task_id: int, line: int | None = None) -> int:
    if task_id not in TASK_IDS:
        raise RecordingDomainError(
            f"task_id {task_id} outside {{1, 2, 3, 4}}", line
        )
    return task_id


def parse_recording(
    source: Source,
    *,
    participant_id: str,
    task_id: int,
    group: Group | str,
    nominal_period: int = DEFAULT_PERIOD_MS,
    pressure_max: int = DEFAULT_PRESSURE_MAX,
) -> TaskRecording:
    """Parse one recording CSV into a :class:`TaskRecording`.

    Row order is preserved exactly. Structural problems raise
    :class:`RecordingParseError` with the offending line number; out-of-domain
    values (status not in {0, 1}, pressure outside [0, pressure_max],
    negative or duplicated timestamps) raise :class:`RecordingDomainError`.
    Decreasing timestamps are accepted here and surfaced by
    :func:`validate_recording` instead.
    """
    stream = _as_text_stream(source)
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        raise RecordingParseError("no samples")
    if tuple(h.strip() for h in header) != RECORDING_HEADER:
        raise RecordingParseError(
            f"bad header {header!r}, expected {','.join(RECORDING_HEADER)}", line=1
        )

    samples: list[PenSample] = []
    append = samples.append
    prev_t = None
    for line_no, row in enumerate(reader, start=2):
        if len(row) != 7:
            raise RecordingParseError(
                f"expected 7 columns, got {len(row)}", line=line_no
            )
        try:
            t = int(row[0])
            x = int(row[1])
            y = int(row[2])
            status = int(row[3])
            azimuth = int(row[4])
            altitude = int(row[5])
            pressure = int(row[6])
        except ValueError:
            raise RecordingParseError(
                f"non-integer field in row {row!r}", line=line_no
            ) from None
        if t < 0:
            raise RecordingDomainError(f"negative timestamp {t}", line=line_no)
        if status not in (STATUS_IN_AIR, STATUS_ON_PAPER):
            raise RecordingDomainError(
                f"status {status} outside {{0, 1}}", line=line_no
            )
        if not 0 <= pressure <= pressure_max:
            raise RecordingDomainError(
                f"pressure {pressure} outside [0, {pressure_max}]", line=line_no
            )
        if prev_t is not None and t == prev_t:
            raise RecordingDomainError(
                f"duplicate timestamp {t} (device artifact, pre-clean required)",
                line=line_no,
            )
        prev_t = t
        append(PenSample(t, x, y, status, azimuth, altitude, pressure))

    if not samples:
        raise RecordingParseError("no samples")
    return TaskRecording(
        participant_id=participant_id,
        task_id=_coerce_task_id(task_id),
        group=_coerce_group(group),
        samples=tuple(samples),
        nominal_period=nominal_period,
    )


def emit_recording(recording: TaskRecording) -> str:
    """Serialize a recording to its canonical CSV text (LF endings).

    ``parse_recording(emit_recording(r), ...)`` reproduces every sample
    field exactly, and emit -> parse -> emit is byte-identical.
    """
    lines = [",".join(RECORDING_HEADER)]
    for s in recording.samples:
        lines.append(f"{s.t},{s.x},{s.y},{s.status},{s.azimuth},{s.altitude},{s.pressure}")
    lines.append("")
    return "\n".join(lines)


def read_recording(path, **meta) -> TaskRecording:
    """Parse a recording from ``path``; ``meta`` as for :func:`parse_recording`."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_recording(fh, **meta)


def write_recording(recording: TaskRecording, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(emit_recording(recording))


def validate_recording(
    recording: TaskRecording,
    *,
    pressure_max: int = DEFAULT_PRESSURE_MAX,
) -> ValidationReport:
    """Scan a parsed recording for quality problems without mutating it.

    Reports non-monotone timestamps and out-of-range pressures as violations,
    plus the fraction of inter-sample gaps deviating from the nominal
    sampling period by more than 25%.
    """
    violations: list[Violation] = []
    period = recording.nominal_period
    deviating = 0
    gaps = 0
    prev = None
    for i, s in enumerate(recording.samples):
        if not 0 <= s.pressure <= pressure_max:
            violations.append(
                Violation(
                    "pressure_out_of_range",
                    i,
                    f"pressure {s.pressure} outside [0, {pressure_max}] at index {i}",
                )
            )
        if prev is not None:
            dt = s.t - prev.t
            if dt <= 0:
                violations.append(
                    Violation(
                        "non_monotone_timestamp",
                        i,
                        f"timestamp {s.t} not after {prev.t} at index {i}",
                    )
                )
            gaps += 1
            # |dt - period| > period/4, kept in exact integer arithmetic
            if 4 * abs(dt - period) > period:
                deviating += 1
        prev = s
    fraction = deviating / gaps if gaps else 0.0
    return ValidationReport(tuple(violations), fraction)


def read_manifest(source: Source) -> list[ManifestEntry]:
    """Parse a manifest CSV mapping recording files to their metadata."""
    stream = _as_text_stream(source)
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        raise RecordingParseError("empty manifest")
    if tuple(h.strip() for h in header) != MANIFEST_HEADER:
        raise RecordingParseError(
            f"bad manifest header {header!r}, expected {','.join(MANIFEST_HEADER)}",
            line=1,
        )
    entries: list[ManifestEntry] = []
    for line_no, row in enumerate(reader, start=2):
        if len(row) != 4:
            raise RecordingParseError(
                f"expected 4 columns, got {len(row)}", line=line_no
            )
        file, participant_id, group, task_field = row
        try:
            task_id = int(task_field)
        except ValueError:
            raise RecordingParseError(
                f"non-integer task_id {task_field!r}", line=line_no
            ) from None
        entries.append(
            ManifestEntry(
                file=file,
                participant_id=participant_id,
                group=_coerce_group(group, line_no),
                task_id=_coerce_task_id(task_id, line_no),
            )
        )
    return entries


def emit_manifest(entries: Iterable[ManifestEntry]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_HEADER)
    for e in entries:
        writer.writerow([e.file, e.participant_id, e.group.value, e.task_id])
    return buf.getvalue()


def write_manifest(entries: Sequence[ManifestEntry], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(emit_manifest(entries))
