"""Partition a recording into maximal in-air / on-paper / idle traits.

Every inter-sample interval ``t[i+1] - t[i]`` is attributed to exactly one
trait: to an idle trait when it exceeds the idle threshold (the pen left the
tracking range, so nothing was recorded), otherwise to the run whose kind
matches the status of the earlier sample. Runs break at status changes and
at idle gaps. This attribution makes the time partition an exact integer
identity: summed trait durations equal ``t_last - t_first`` with no
tolerance, for every recording.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .trace import STATUS_ON_PAPER, PenSample, TaskRecording


class DegenerateRecordingError(ValueError):
    """Recording too short to segment (fewer than 2 samples)."""


class TraitKind(Enum):
    IN_AIR = "in_air"
    ON_PAPER = "on_paper"
    IDLE = "idle"


def _kind_of_status(status: int) -> TraitKind:
    return TraitKind.ON_PAPER if status == STATUS_ON_PAPER else TraitKind.IN_AIR


@dataclass(frozen=True)
class Trait:
    """A maximal time span in one pen state.

    Idle traits carry no samples (the tablet recorded nothing). A trait
    may have zero duration: a status change at the very last sample opens
    a trait that never accumulates an interval.
    """

    kind: TraitKind
    start_t: int
    end_t: int
    samples: tuple[PenSample, ...]

    @property
    def duration(self) -> int:
        return self.end_t - self.start_t


@dataclass(frozen=True)
class Segmentation:
    """Ordered, contiguous, non-overlapping traits covering a recording."""

    traits: tuple[Trait, ...]
    idle_threshold: int


class TraitCounts(NamedTuple):
    nup: int
    ndown: int
    nidle: int


class TraitTimes(NamedTuple):
    tup: int
    tdown: int
    tidle: int
    ttotal: int


def segment(
    recording: TaskRecording, idle_threshold: int | None = None
) -> Segmentation:
    """Split ``recording`` into maximal traits.

    ``idle_threshold`` defaults to 3x the nominal sampling period; gaps
    strictly longer than it become idle traits and split runs even when the
    pen status matches on both sides. Requires at least 2 samples with
    strictly increasing timestamps.
    """
    samples = recording.samples
    if len(samples) < 2:
        raise DegenerateRecordingError(
            f"cannot segment {len(samples)} sample(s); need at least 2"
        )
    tau = 3 * recording.nominal_period if idle_threshold is None else idle_threshold
    if tau <= 0:
        raise ValueError(f"idle threshold must be positive, got {tau}")

    traits: list[Trait] = []
    first = samples[0]
    run_kind = _kind_of_status(first.status)
    run_start = first.t
    run_samples = [first]
    prev = first
    for s in samples[1:]:
        dt = s.t - prev.t
        if dt <= 0:
            raise ValueError(
                f"timestamps must be strictly increasing ({prev.t} -> {s.t})"
            )
        kind = _kind_of_status(s.status)
        if dt > tau:
            # Gap interval belongs to an idle trait; the run keeps only the
            # time up to its last recorded sample.
            traits.append(Trait(run_kind, run_start, prev.t, tuple(run_samples)))
            traits.append(Trait(TraitKind.IDLE, prev.t, s.t, ()))
            run_kind, run_start, run_samples = kind, s.t, [s]
        elif kind is run_kind:
            run_samples.append(s)
        else:
            # Interval belongs to the earlier sample's kind, so the closing
            # run extends to the new sample's timestamp.
            traits.append(Trait(run_kind, run_start, s.t, tuple(run_samples)))
            run_kind, run_start, run_samples = kind, s.t, [s]
        prev = s
    traits.append(Trait(run_kind, run_start, prev.t, tuple(run_samples)))
    return Segmentation(tuple(traits), tau)


def trait_counts(segmentation: Segmentation) -> TraitCounts:
    """Count traits by kind: (in-air, on-paper, idle)."""
    nup = ndown = nidle = 0
    for t in segmentation.traits:
        if t.kind is TraitKind.IN_AIR:
            nup += 1
        elif t.kind is TraitKind.ON_PAPER:
            ndown += 1
        else:
            nidle += 1
    return TraitCounts(nup, ndown, nidle)


def trait_times(segmentation: Segmentation) -> TraitTimes:
    """Sum trait durations by kind; the total equals their exact sum."""
    tup = tdown = tidle = 0
    for t in segmentation.traits:
        if t.kind is TraitKind.IN_AIR:
            tup += t.duration
        elif t.kind is TraitKind.ON_PAPER:
            tdown += t.duration
        else:
            tidle += t.duration
    return TraitTimes(tup, tdown, tidle, tup + tdown + tidle)


def traits_to_csv(segmentation: Segmentation) -> str:
    """Debug dump: one ``kind,start_t,end_t,n_samples`` line per trait."""
    lines = ["kind,start_t,end_t,n_samples"]
    for t in segmentation.traits:
        lines.append(f"{t.kind.value},{t.start_t},{t.end_t},{len(t.samples)}")
    lines.append("")
    return "\n".join(lines)
