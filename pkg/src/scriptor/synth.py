"""Synthetic recordings and cohorts with known ground truth.

A stroke script is a plan of timed pen movements: on-paper strokes, in-air
hops, and idle gaps (timestamp jumps with no samples). The generator emits
fixed-rate samples along each plan and independently derives the trait
structure the extraction pipeline should find, so scripted recordings act
as an oracle for the whole feature pipeline.

Sampling convention: a stroke occupies a half-open time span and emits one
sample per period from its start; a closing sample at the stroke's exact
end is added when the stroke is followed by an idle gap or ends the script.
That convention makes every planned duration equal the extracted trait
duration exactly, in integer milliseconds.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Iterable, Mapping, Sequence, Union

from .segmentation import TraitCounts, TraitKind, TraitTimes
from .trace import (
    DEFAULT_PERIOD_MS,
    DEFAULT_PRESSURE_MAX,
    STATUS_IN_AIR,
    STATUS_ON_PAPER,
    Group,
    ManifestEntry,
    PenSample,
    TaskRecording,
    write_manifest,
    write_recording,
)

logger = logging.getLogger(__name__)

CANVAS_MAX = 20000  # tablet units, both axes


@dataclass(frozen=True)
class StrokePlan:
    """One planned segment: a pen stroke, an in-air hop, or an idle gap.

    ``duration`` is in ms and must be a positive multiple of the sampling
    period for strokes; ``pressure`` ramps linearly between its two values
    over the stroke.
    """

    kind: TraitKind
    duration: int
    start: tuple[int, int] | None = None
    end: tuple[int, int] | None = None
    pressure: tuple[int, int] = (0, 0)


def on_paper(
    duration: int,
    start: tuple[int, int],
    end: tuple[int, int],
    pressure: Union[int, tuple[int, int]] = 300,
) -> StrokePlan:
    if isinstance(pressure, int):
        pressure = (pressure, pressure)
    return StrokePlan(TraitKind.ON_PAPER, duration, start, end, pressure)


def in_air(duration: int, start: tuple[int, int], end: tuple[int, int]) -> StrokePlan:
    return StrokePlan(TraitKind.IN_AIR, duration, start, end, (0, 0))


def idle(duration: int) -> StrokePlan:
    return StrokePlan(TraitKind.IDLE, duration)


@dataclass(frozen=True)
class StrokeScript:
    plans: tuple[StrokePlan, ...]

    def __post_init__(self):
        object.__setattr__(self, "plans", tuple(self.plans))


@dataclass(frozen=True)
class TraitTruth:
    """Planned trait boundaries and geometry, for checking extraction."""

    kind: TraitKind
    start_t: int
    end_t: int
    n_samples: int
    first_point: tuple[int, int] | None
    last_point: tuple[int, int] | None
    bbox: tuple[int, int, int, int] | None


@dataclass(frozen=True)
class GroundTruth:
    """What extraction must find for a scripted recording.

    Counts and times are integer-exact; space and inclination values are
    derived from the emitted sample coordinates. Space/inclination are
    ``None`` when the script has no on-paper stroke.
    """

    counts: TraitCounts
    times: TraitTimes
    sbb: float | None
    savg: float | None
    stotal: float | None
    iavg: float | None
    traits: tuple[TraitTruth, ...]


def _validate_script(
    plans: Sequence[StrokePlan], period: int, pressure_max: int, tau: int
) -> None:
    if not plans:
        raise ValueError("script has no plans")
    if plans[0].kind is TraitKind.IDLE or plans[-1].kind is TraitKind.IDLE:
        raise ValueError(
            "script cannot start or end with an idle gap (no sample would bound it)"
        )
    previous_idle = False
    for i, plan in enumerate(plans):
        if plan.kind is TraitKind.IDLE:
            if previous_idle:
                raise ValueError(f"plan {i}: adjacent idle gaps, merge them")
            if plan.duration <= 0:
                raise ValueError(f"plan {i}: idle duration must be positive")
            if plan.duration <= tau:
                logger.warning(
                    "plan %d: idle gap of %d ms is <= threshold %d ms and will "
                    "not be detected as idle",
                    i,
                    plan.duration,
                    tau,
                )
            previous_idle = True
            continue
        previous_idle = False
        if plan.duration < period or plan.duration % period:
            raise ValueError(
                f"plan {i}: stroke duration {plan.duration} must be a positive "
                f"multiple of the {period} ms period"
            )
        if plan.start is None or plan.end is None:
            raise ValueError(f"plan {i}: stroke needs start and end points")
        p0, p1 = plan.pressure
        if not (0 <= p0 <= pressure_max and 0 <= p1 <= pressure_max):
            raise ValueError(
                f"plan {i}: pressure {plan.pressure} outside [0, {pressure_max}]"
            )


@dataclass
class _EmittedStroke:
    kind: TraitKind
    first: int  # sample indices, inclusive
    last: int
    gap_before: int | None


def generate_recording(
    script: Union[StrokeScript, Sequence[StrokePlan]],
    *,
    participant_id: str = "SYN01",
    task_id: int = 1,
    group: Group | str = Group.NOR,
    seed: int = 0,
    nominal_period: int = DEFAULT_PERIOD_MS,
    pressure_max: int = DEFAULT_PRESSURE_MAX,
    idle_threshold: int | None = None,
    start_t: int = 0,
) -> tuple[TaskRecording, GroundTruth]:
    """Emit a recording for ``script`` plus its expected trait structure.

    The seed only feeds pass-through metadata (pen angles); positions,
    timestamps, status, and pressures are fully determined by the script.
    The same script and seed always produce an identical recording.
    """
    plans = tuple(script.plans if isinstance(script, StrokeScript) else script)
    period = nominal_period
    tau = 3 * period if idle_threshold is None else idle_threshold
    _validate_script(plans, period, pressure_max, tau)
    group = Group(group)
    rng = random.Random(seed)

    samples: list[PenSample] = []
    strokes: list[_EmittedStroke] = []
    cursor = start_t
    pending_gap: int | None = None
    last_index = len(plans) - 1
    for i, plan in enumerate(plans):
        if plan.kind is TraitKind.IDLE:
            pending_gap = plan.duration
            cursor += plan.duration
            continue
        status = STATUS_ON_PAPER if plan.kind is TraitKind.ON_PAPER else STATUS_IN_AIR
        azimuth = rng.randrange(0, 3600)
        altitude = rng.randrange(300, 901)
        closes = i == last_index or plans[i + 1].kind is TraitKind.IDLE
        count = plan.duration // period + (1 if closes else 0)
        x0, y0 = plan.start
        x1, y1 = plan.end
        p0, p1 = plan.pressure
        dx, dy, dp = x1 - x0, y1 - y0, p1 - p0
        duration = float(plan.duration)
        first = len(samples)
        append = samples.append
        for j in range(count):
            f = (j * period) / duration
            append(
                PenSample(
                    cursor + j * period,
                    round(x0 + dx * f),
                    round(y0 + dy * f),
                    status,
                    azimuth,
                    altitude,
                    round(p0 + dp * f),
                )
            )
        strokes.append(_EmittedStroke(plan.kind, first, len(samples) - 1, pending_gap))
        pending_gap = None
        cursor += plan.duration

    recording = TaskRecording(
        participant_id=participant_id,
        task_id=task_id,
        group=group,
        samples=tuple(samples),
        nominal_period=period,
    )
    return recording, _ground_truth(strokes, samples, tau)


def _ground_truth(
    strokes: Sequence[_EmittedStroke], samples: Sequence[PenSample], tau: int
) -> GroundTruth:
    # Merge planned strokes into runs the way extraction will: a gap splits
    # runs only when detected (> tau); otherwise same-kind neighbours fuse
    # and the undetected gap time joins the earlier trait.
    runs: list[list] = []  # [kind, first, last]
    idle_after: list[bool] = []
    for s in strokes:
        detected = s.gap_before is not None and s.gap_before > tau
        if runs and not detected and runs[-1][0] is s.kind:
            runs[-1][2] = s.last
        else:
            if runs:
                idle_after.append(detected)
            runs.append([s.kind, s.first, s.last])

    traits: list[TraitTruth] = []
    counts = {TraitKind.IN_AIR: 0, TraitKind.ON_PAPER: 0, TraitKind.IDLE: 0}
    times = {TraitKind.IN_AIR: 0, TraitKind.ON_PAPER: 0, TraitKind.IDLE: 0}

    def bbox_of(first: int, last: int) -> tuple[int, int, int, int]:
        xs = [samples[i].x for i in range(first, last + 1)]
        ys = [samples[i].y for i in range(first, last + 1)]
        return min(xs), min(ys), max(xs), max(ys)

    for idx, (kind, first, last) in enumerate(runs):
        start_t = samples[first].t
        if idx < len(runs) - 1 and not idle_after[idx]:
            end_t = samples[runs[idx + 1][1]].t
        else:
            end_t = samples[last].t
        counts[kind] += 1
        times[kind] += end_t - start_t
        traits.append(
            TraitTruth(
                kind=kind,
                start_t=start_t,
                end_t=end_t,
                n_samples=last - first + 1,
                first_point=(samples[first].x, samples[first].y),
                last_point=(samples[last].x, samples[last].y),
                bbox=bbox_of(first, last) if kind is TraitKind.ON_PAPER else None,
            )
        )
        if idx < len(runs) - 1 and idle_after[idx]:
            gap_start = samples[last].t
            gap_end = samples[runs[idx + 1][1]].t
            counts[TraitKind.IDLE] += 1
            times[TraitKind.IDLE] += gap_end - gap_start
            traits.append(
                TraitTruth(TraitKind.IDLE, gap_start, gap_end, 0, None, None, None)
            )

    on_paper_runs = [r for r in runs if r[0] is TraitKind.ON_PAPER]
    if on_paper_runs:
        area = 0
        boxes = []
        for _, first, last in on_paper_runs:
            x0, y0, x1, y1 = bbox_of(first, last)
            area += (x1 - x0) * (y1 - y0)
            boxes.append((x1 - x0, y1 - y0))
        hops = []
        for (_, _, last_a), (_, first_b, _) in zip(on_paper_runs, on_paper_runs[1:]):
            a, b = samples[last_a], samples[first_b]
            hops.append(math.hypot(b.x - a.x, b.y - a.y))
        stotal = math.fsum(hops)
        savg = stotal / (len(on_paper_runs) - 1) if len(on_paper_runs) > 1 else 0.0
        sbb = float(area)
        angles = [
            math.degrees(math.atan2(h, w)) for w, h in boxes if not (w == 0 and h == 0)
        ]
        iavg = fmean(angles) if angles else None
    else:
        sbb = savg = stotal = iavg = None

    total = times[TraitKind.IN_AIR] + times[TraitKind.ON_PAPER] + times[TraitKind.IDLE]
    return GroundTruth(
        counts=TraitCounts(
            counts[TraitKind.IN_AIR], counts[TraitKind.ON_PAPER], counts[TraitKind.IDLE]
        ),
        times=TraitTimes(
            times[TraitKind.IN_AIR], times[TraitKind.ON_PAPER], times[TraitKind.IDLE], total
        ),
        sbb=sbb,
        savg=savg,
        stotal=stotal,
        iavg=iavg,
        traits=tuple(traits),
    )


# --- cohort generation ----------------------------------------------------


@dataclass(frozen=True)
class TargetSpec:
    """Truncated-normal draw parameters for one category score."""

    mean: float
    spread: float


@dataclass(frozen=True)
class GroupProfile:
    """Per-group targets for the script builder, as category scores.

    ``ductus`` targets the mean of the three trait counts, ``time`` the mean
    of the four time features (ms), ``pressure`` the mean of the six
    pressure features.
    """

    ductus: TargetSpec
    time: TargetSpec
    pressure: TargetSpec


@dataclass(frozen=True)
class CohortSpec:
    """Cohort layout plus per-(task, group) feature targets and RNG seed."""

    group_sizes: Mapping[str, int]
    profiles: Mapping[int, Mapping[str, GroupProfile]]
    seed: int = 1729
    nominal_period: int = DEFAULT_PERIOD_MS
    pressure_max: int = DEFAULT_PRESSURE_MAX


@dataclass(frozen=True)
class SynthRecording:
    entry: ManifestEntry
    recording: TaskRecording
    truth: GroundTruth


DEFAULT_GROUP_SIZES: dict[str, int] = {"CL": 14, "SEV": 15, "NOR": 20}

# Demo cohort profile: per task, per group, the (mean, spread) targets for
# the ductus / time / pressure category scores.
DEFAULT_PROFILES: dict[int, dict[str, tuple[tuple[float, float], tuple[float, float], tuple[float, float]]]] = {
    1: {
        "CL": ((26.286, 3.480), (17675.821, 1556.496), (369.646, 22.644)),
        "SEV": ((14.978, 3.362), (12131.050, 1503.718), (446.241, 21.876)),
        "NOR": ((3.100, 2.912), (7096.075, 1302.258), (495.572, 18.945)),
    },
    2: {
        "CL": ((49.857, 4.167), (23026.286, 2020.529), (339.659, 23.303)),
        "SEV": ((24.600, 4.304), (18031.850, 1952.016), (417.886, 22.513)),
        "NOR": ((16.600, 3.494), (13494.300, 1690.496), (426.029, 19.497)),
    },
    3: {
        "CL": ((47.643, 3.665), (13000.0, 1500.0), (355.0, 23.0)),
        "SEV": ((25.111, 3.541), (10500.0, 1400.0), (410.0, 22.0)),
        "NOR": ((19.733, 3.066), (8200.0, 1300.0), (440.0, 20.0)),
    },
    4: {
        "CL": ((60.214, 3.927), (12000.0, 1500.0), (360.0, 23.0)),
        "SEV": ((35.578, 3.794), (9800.0, 1400.0), (415.0, 22.0)),
        "NOR": ((30.083, 3.286), (7600.0, 1300.0), (445.0, 20.0)),
    },
}

DEFAULT_SEED = 1729


def default_cohort_spec(seed: int = DEFAULT_SEED) -> CohortSpec:
    """The bundled demo cohort: 14/15/20 participants, four tasks."""
    profiles = {
        task: {
            label: GroupProfile(
                ductus=TargetSpec(*targets[0]),
                time=TargetSpec(*targets[1]),
                pressure=TargetSpec(*targets[2]),
            )
            for label, targets in by_group.items()
        }
        for task, by_group in DEFAULT_PROFILES.items()
    }
    return CohortSpec(group_sizes=dict(DEFAULT_GROUP_SIZES), profiles=profiles, seed=seed)


def _validate_spec(spec: CohortSpec) -> None:
    if not spec.group_sizes:
        raise ValueError("cohort spec has no groups")
    for label, n in spec.group_sizes.items():
        Group(label)  # raises on unknown labels
        if n < 2:
            raise ValueError(f"group {label}: needs at least 2 participants, got {n}")
    if not spec.profiles:
        raise ValueError("cohort spec has no task profiles")
    for task, by_group in spec.profiles.items():
        if task not in (1, 2, 3, 4):
            raise ValueError(f"task {task} outside {{1, 2, 3, 4}}")
        for label in spec.group_sizes:
            if label not in by_group:
                raise ValueError(f"task {task}: missing profile for group {label}")
            profile = by_group[label]
            for target in (profile.ductus, profile.time, profile.pressure):
                if target.spread < 0:
                    raise ValueError(f"task {task} {label}: negative spread {target.spread}")


def _draw_floored(rng: random.Random, mean: float, spread: float, floor: float) -> float:
    """Normal draw with resampling against the feasibility floor.

    After a few attempts the draw is clamped to the floor; either path is
    logged so infeasible targets are visible.
    """
    for _ in range(8):
        value = rng.gauss(mean, spread) if spread > 0 else mean
        if value >= floor:
            return value
        logger.debug("draw %.3f below floor %.3f for mean %.3f; resampling", value, floor, mean)
    logger.info("target mean %.3f (spread %.3f) kept falling below %.3f; clamped", mean, spread, floor)
    return floor


def _segment_durations(
    k: int, m: int, total: int, period: int
) -> tuple[list[TraitKind], list[int]]:
    """Deterministically split a total duration over 2k-1 segments.

    ``k`` on-paper strokes alternate with separators, of which the first
    ``m`` are idle gaps and the rest in-air hops. Weights (on-paper 2,
    in-air 1, idle 4) keep idle gaps above the default detection threshold.
    The split depends only on (k, m, total), so equal targets yield equal
    ductus/time features.
    """
    kinds: list[TraitKind] = []
    for i in range(k):
        kinds.append(TraitKind.ON_PAPER)
        if i < k - 1:
            kinds.append(TraitKind.IDLE if i < m else TraitKind.IN_AIR)
    weight = {TraitKind.ON_PAPER: 2, TraitKind.IN_AIR: 1, TraitKind.IDLE: 4}
    weight_sum = sum(weight[kd] for kd in kinds)
    min_total = period * weight_sum
    if total < min_total:
        logger.info(
            "total duration %d ms infeasible for %d segments; raised to %d ms",
            total,
            len(kinds),
            min_total,
        )
        total = min_total
    unit = (total // weight_sum) // period * period
    durations = [weight[kd] * unit for kd in kinds]
    durations[0] += total - sum(durations)
    return kinds, durations


def _bounded_step(rng: random.Random, value: int, dmin: int, dmax: int) -> int:
    """Random step of at least ``dmin``, reflected off the canvas border."""
    delta = rng.choice((-1, 1)) * rng.randint(dmin, dmax)
    moved = value + delta
    if moved < 0 or moved > CANVAS_MAX:
        moved = value - delta
    return moved


def _participant_task_script(
    rng: random.Random, profile: GroupProfile, period: int, pressure_max: int
) -> StrokeScript:
    score = _draw_floored(rng, profile.ductus.mean, profile.ductus.spread, 1.0)
    k = max(2, round((3.0 * score + 1.0) / 2.0))
    m = min(k - 1, k // 8)
    time_score = _draw_floored(rng, profile.time.mean, profile.time.spread, 500.0)
    total = round(2.0 * time_score / period) * period
    kinds, durations = _segment_durations(k, m, total, period)

    half_range = rng.randint(8, 24)
    pressure_score = _draw_floored(
        rng, profile.pressure.mean, profile.pressure.spread, float(half_range + 1)
    )
    # Five of the six pressure features sit near the ramp midpoint and the
    # sixth (the spread) near half_range/sqrt(3); invert that mixture.
    mid = round((6.0 * pressure_score - half_range / math.sqrt(3.0)) / 5.0)
    mid = max(half_range, min(mid, pressure_max - half_range))
    ramp = (mid - half_range, mid + half_range)

    x = rng.randint(1000, CANVAS_MAX - 1000)
    y = rng.randint(1000, CANVAS_MAX - 1000)
    plans: list[StrokePlan] = []
    for kind, duration in zip(kinds, durations):
        if kind is TraitKind.IDLE:
            plans.append(idle(duration))
            continue
        nx = _bounded_step(rng, x, 40, 700)
        ny = _bounded_step(rng, y, 20, 500)
        if kind is TraitKind.ON_PAPER:
            plans.append(on_paper(duration, (x, y), (nx, ny), ramp))
        else:
            plans.append(in_air(duration, (x, y), (nx, ny)))
        x, y = nx, ny
    return StrokeScript(tuple(plans))


def generate_cohort(spec: CohortSpec) -> list[SynthRecording]:
    """Generate one recording per (participant, task) around group targets.

    Each participant gets an RNG stream derived from (seed, participant id),
    so generation is deterministic and order-independent across
    participants.
    """
    _validate_spec(spec)
    out: list[SynthRecording] = []
    tasks = sorted(spec.profiles)
    for label in (g.value for g in Group):
        if label not in spec.group_sizes:
            continue
        for index in range(1, spec.group_sizes[label] + 1):
            participant_id = f"{label}{index:02d}"
            prng = random.Random(f"{spec.seed}:{participant_id}")
            for task_id in tasks:
                profile = spec.profiles[task_id][label]
                script = _participant_task_script(
                    prng, profile, spec.nominal_period, spec.pressure_max
                )
                recording, truth = generate_recording(
                    script,
                    participant_id=participant_id,
                    task_id=task_id,
                    group=Group(label),
                    seed=prng.getrandbits(32),
                    nominal_period=spec.nominal_period,
                    pressure_max=spec.pressure_max,
                )
                entry = ManifestEntry(
                    file=f"{participant_id}_task{task_id}.csv",
                    participant_id=participant_id,
                    group=Group(label),
                    task_id=task_id,
                )
                out.append(SynthRecording(entry, recording, truth))
    return out


def write_cohort(recordings: Iterable[SynthRecording], out_dir) -> Path:
    """Write cohort recordings plus ``manifest.csv``; returns manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for item in recordings:
        write_recording(item.recording, out_dir / item.entry.file)
        entries.append(item.entry)
    manifest_path = out_dir / "manifest.csv"
    write_manifest(entries, manifest_path)
    return manifest_path


# --- cohort spec JSON schema ------------------------------------------------


def _target_from_json(value, path: str) -> TargetSpec:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise ValueError(f"{path}: expected [mean, spread], got {value!r}")
    return TargetSpec(float(value[0]), float(value[1]))


def cohort_spec_from_dict(data: Mapping) -> CohortSpec:
    """Build a CohortSpec from its JSON form; errors name the failing path."""
    if not isinstance(data, Mapping):
        raise ValueError(f"spec root: expected an object, got {type(data).__name__}")
    sizes_raw = data.get("group_sizes")
    if not isinstance(sizes_raw, Mapping) or not sizes_raw:
        raise ValueError("group_sizes: expected a non-empty object")
    group_sizes = {}
    for label, n in sizes_raw.items():
        if not isinstance(n, int):
            raise ValueError(f"group_sizes.{label}: expected an integer, got {n!r}")
        group_sizes[str(label)] = n
    targets_raw = data.get("targets")
    if not isinstance(targets_raw, Mapping) or not targets_raw:
        raise ValueError("targets: expected a non-empty object")
    profiles: dict[int, dict[str, GroupProfile]] = {}
    for task_key, by_group in targets_raw.items():
        try:
            task_id = int(task_key)
        except (TypeError, ValueError):
            raise ValueError(f"targets.{task_key}: task key must be an integer") from None
        if not isinstance(by_group, Mapping):
            raise ValueError(f"targets.{task_key}: expected an object")
        profiles[task_id] = {}
        for label, cats in by_group.items():
            if not isinstance(cats, Mapping):
                raise ValueError(f"targets.{task_key}.{label}: expected an object")
            path = f"targets.{task_key}.{label}"
            for cat in ("ductus", "time", "pressure"):
                if cat not in cats:
                    raise ValueError(f"{path}.{cat}: missing")
            profiles[task_id][str(label)] = GroupProfile(
                ductus=_target_from_json(cats["ductus"], f"{path}.ductus"),
                time=_target_from_json(cats["time"], f"{path}.time"),
                pressure=_target_from_json(cats["pressure"], f"{path}.pressure"),
            )
    return CohortSpec(
        group_sizes=group_sizes,
        profiles=profiles,
        seed=int(data.get("seed", DEFAULT_SEED)),
        nominal_period=int(data.get("nominal_period_ms", DEFAULT_PERIOD_MS)),
        pressure_max=int(data.get("pressure_max", DEFAULT_PRESSURE_MAX)),
    )


def cohort_spec_to_dict(spec: CohortSpec) -> dict:
    return {
        "seed": spec.seed,
        "nominal_period_ms": spec.nominal_period,
        "pressure_max": spec.pressure_max,
        "group_sizes": dict(spec.group_sizes),
        "targets": {
            str(task): {
                label: {
                    "ductus": [profile.ductus.mean, profile.ductus.spread],
                    "time": [profile.time.mean, profile.time.spread],
                    "pressure": [profile.pressure.mean, profile.pressure.spread],
                }
                for label, profile in by_group.items()
            }
            for task, by_group in sorted(spec.profiles.items())
        },
    }
