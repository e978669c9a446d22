import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scriptor.segmentation import (
    DegenerateRecordingError,
    TraitKind,
    segment,
    trait_counts,
    trait_times,
    traits_to_csv,
)
from scriptor.synth import StrokeScript, generate_recording, in_air, on_paper
from scriptor.trace import Group, PenSample, TaskRecording


def recording_from(ts_statuses, pressure=100):
    samples = tuple(
        PenSample(t, i, 2 * i, status, 0, 0, pressure if status else 0)
        for i, (t, status) in enumerate(ts_statuses)
    )
    return TaskRecording("P01", 1, Group.NOR, samples)


def test_single_on_paper_run():
    seg = segment(recording_from([(0, 1), (8, 1), (16, 1)]))
    assert [t.kind for t in seg.traits] == [TraitKind.ON_PAPER]
    assert seg.traits[0].duration == 16
    assert trait_counts(seg) == (0, 1, 0)
    assert trait_times(seg) == (0, 16, 0, 16)


def test_status_change_extends_closing_run():
    # the interval between samples of different status belongs to the earlier kind
    seg = segment(recording_from([(0, 1), (8, 1), (16, 0), (24, 0)]), idle_threshold=24)
    assert [(t.kind, t.start_t, t.end_t) for t in seg.traits] == [
        (TraitKind.ON_PAPER, 0, 16),
        (TraitKind.IN_AIR, 16, 24),
    ]
    assert trait_counts(seg) == (1, 1, 0)


def test_idle_gap_interrupts_same_status_run():
    # hand enumeration: intervals (0,8) on-paper, (8,508) idle, (508,516) on-paper
    seg = segment(recording_from([(0, 1), (8, 1), (508, 1), (516, 1)]), idle_threshold=24)
    assert [(t.kind, t.start_t, t.end_t) for t in seg.traits] == [
        (TraitKind.ON_PAPER, 0, 8),
        (TraitKind.IDLE, 8, 508),
        (TraitKind.ON_PAPER, 508, 516),
    ]
    assert trait_counts(seg) == (0, 2, 1)
    assert trait_times(seg) == (0, 16, 500, 516)


def test_trailing_status_change_opens_zero_duration_trait():
    seg = segment(recording_from([(0, 1), (8, 1), (16, 0)]))
    assert [(t.kind, t.start_t, t.end_t) for t in seg.traits] == [
        (TraitKind.ON_PAPER, 0, 16),
        (TraitKind.IN_AIR, 16, 16),
    ]
    # every sample belongs to a kind-pure trait
    assert len(seg.traits[1].samples) == 1


def test_idle_traits_carry_no_samples():
    seg = segment(recording_from([(0, 1), (800, 1)]), idle_threshold=24)
    idle = [t for t in seg.traits if t.kind is TraitKind.IDLE]
    assert len(idle) == 1 and idle[0].samples == ()


def test_degenerate_recording():
    with pytest.raises(DegenerateRecordingError):
        segment(recording_from([(0, 1)]))


def test_non_monotone_rejected():
    with pytest.raises(ValueError, match="strictly increasing"):
        segment(recording_from([(0, 1), (16, 1), (8, 1)]))


def test_scripted_pen_lifts_count():
    # k lifts with no idle gaps: Ndown = k+1, Nup = k
    for k in (1, 3, 6):
        plans = []
        x = 0
        for i in range(k + 1):
            plans.append(on_paper(40, (x, 0), (x + 30, 20), 300))
            x += 30
            if i < k:
                plans.append(in_air(16, (x, 20), (x + 10, 0)))
                x += 10
        rec, _ = generate_recording(StrokeScript(tuple(plans)), seed=k)
        counts = trait_counts(segment(rec))
        assert counts.ndown == k + 1
        assert counts.nup == k
        assert counts.nidle == 0


def test_traits_csv_dump():
    seg = segment(recording_from([(0, 1), (8, 1), (508, 1), (516, 1)]), idle_threshold=24)
    text = traits_to_csv(seg)
    lines = text.splitlines()
    assert lines[0] == "kind,start_t,end_t,n_samples"
    assert lines[1] == "on_paper,0,8,2"
    assert lines[2] == "idle,8,508,0"
    assert lines[3] == "on_paper,508,516,2"


@st.composite
def random_streams(draw):
    n = draw(st.integers(min_value=2, max_value=80))
    gaps = draw(
        st.lists(
            st.sampled_from([2, 8, 8, 8, 16, 24, 25, 40, 200, 600]),
            min_size=n - 1,
            max_size=n - 1,
        )
    )
    statuses = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    ts = [0]
    for g in gaps:
        ts.append(ts[-1] + g)
    return recording_from(list(zip(ts, statuses)))


@given(random_streams())
@settings(max_examples=200, deadline=None)
def test_partition_identity(rec):
    seg = segment(rec)
    times = trait_times(seg)
    assert times.ttotal == rec.samples[-1].t - rec.samples[0].t
    assert times.tup + times.tdown + times.tidle == times.ttotal
    assert sum(t.duration for t in seg.traits) == times.ttotal


@given(random_streams())
@settings(max_examples=200, deadline=None)
def test_traits_contiguous_and_pure(rec):
    seg = segment(rec)
    for a, b in zip(seg.traits, seg.traits[1:]):
        assert a.end_t == b.start_t
        assert a.kind is not b.kind, "adjacent traits must differ in kind"
    for t in seg.traits:
        assert t.end_t >= t.start_t
        if t.kind is TraitKind.IDLE:
            assert t.samples == ()
        else:
            want = 1 if t.kind is TraitKind.ON_PAPER else 0
            assert all(s.status == want for s in t.samples)
    # every sample lands in exactly one non-idle trait
    assert sum(len(t.samples) for t in seg.traits) == len(rec.samples)


@given(random_streams(), st.integers(min_value=9, max_value=100), st.integers(min_value=1, max_value=500))
@settings(max_examples=200, deadline=None)
def test_idle_monotone_in_threshold(rec, tau, extra):
    lo = segment(rec, idle_threshold=tau)
    hi = segment(rec, idle_threshold=tau + extra)
    assert trait_counts(lo).nidle >= trait_counts(hi).nidle
    assert trait_times(lo).tidle >= trait_times(hi).tidle


@given(random_streams())
@settings(max_examples=50, deadline=None)
def test_segment_deterministic(rec):
    assert segment(rec) == segment(rec)
