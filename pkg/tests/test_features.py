import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ecg_fxp.detect import QrsEvent
from ecg_fxp.features import (
    FeatureError,
    RPeakTracker,
    WidthCounter,
    assemble_beats,
    refine_peak,
    rr_and_hr,
)
from ecg_fxp.ingest import synth_beats
from ecg_fxp.runner import run_fixed


def widths_of(si, thr, holdoff=20, key="emit"):
    wc = WidthCounter(holdoff)
    out = []
    for i in range(1, len(si)):
        w = wc.step(si[i], si[i - 1], thr, i)
        if w is not None:
            out.append((i if key == "emit" else wc.peak_index, w))
    return out


def peaks_of(si, guard=50):
    rt = RPeakTracker(guard)
    return [r for i, v in enumerate(si) if (r := rt.step(v, i)) is not None]


# -- width counter ------------------------------------------------------------


def test_width_never_above_threshold():
    si = [0, 1, 2, 3, 2, 1, 0] * 10
    assert widths_of(si, 5) == []


@pytest.mark.parametrize("a,b", [(10, 30), (5, 6), (40, 45)])
def test_width_linear_ramp(a, b):
    si = list(range(b + 1)) + list(range(b - 1, -1, -1))
    assert widths_of(si, a - 0.5, key="peak") == [(b, b - a)]


def test_width_runs_through_ripples():
    # two-humped rise: the dip on the way up does not end the count
    si = [0, 1, 2, 3, 4, 5, 4.5, 5, 6, 7, 8, 7, 6, 5, 4, 3, 2, 1, 0]
    assert widths_of(si, 1.5, key="peak") == [(10, 8)]
    # below-threshold dip splits the excursion; the hold-off drops the second part
    si = [0, 1, 2, 3, 4, 1, 4, 6, 8, 3, 0]
    assert widths_of(si, 1.5, key="peak") == [(4, 2)]


def test_width_holdoff_suppresses_second_crossing():
    lobe = [0, 2, 4, 6, 8, 6, 4, 2, 0, 0]
    si = [0] * 5 + lobe + lobe + [0] * 40
    assert len(widths_of(si, 3)) == 1
    # outside the hold-off both lobes count
    si = [0] * 5 + lobe + [0] * 30 + lobe + [0] * 5
    assert len(widths_of(si, 3)) == 2


def test_width_single_sample_blip_is_discarded():
    assert widths_of([0, 5, 0, 0], 1) == []


@settings(max_examples=200)
@given(st.lists(st.integers(0, 20), min_size=2, max_size=300), st.integers(0, 20), st.integers(1, 40))
def test_width_positive_and_holdoff(si, thr, holdoff):
    out = widths_of(si, thr, holdoff)
    assert all(w > 0 for _, w in out)
    # each width is counted within one rise, so the next emit is at least holdoff + w + 1 later
    for (i0, _), (i1, w1) in zip(out, out[1:]):
        assert i1 - w1 - 1 >= i0 + holdoff


def test_width_counter_state_consistent():
    wc = WidthCounter(20)
    si = [0, 1, 3, 5, 4, 2]
    for i in range(1, len(si)):
        wc.step(si[i], si[i - 1], 0.5, i)
        if not wc.counting:
            assert wc.count == 0


# -- R-peak tracker ---------------------------------------------------------------


def test_rpeak_strictly_increasing_never_fires():
    assert peaks_of(list(range(500))) == []


def test_rpeak_triangle():
    si = list(range(61)) + list(range(59, -1, -1))
    assert peaks_of(si) == [60]


def test_rpeak_plateau_fires_once():
    si = list(range(61)) + [60] * 10 + list(range(59, -1, -1))
    assert peaks_of(si) == [60]


def test_rpeak_needs_sustained_rise():
    si = list(range(30)) + list(range(29, -1, -1))
    assert peaks_of(si) == []
    assert peaks_of(si, guard=20) == [29]


def rise_with_dip(dip):
    si = np.arange(100, dtype=float)
    si[dip] = dip - 1.5  # one falling step at `dip`, rising everywhere else
    return list(si) + list(np.arange(98, -1, -1, dtype=float))


def test_rpeak_dip_inside_guard_blocks():
    # turn at 99 is tested at n = 100, so the guard covers p(50) .. p(99)
    assert peaks_of(rise_with_dip(50)) == []
    assert peaks_of(rise_with_dip(49)) == [99]


# -- rr / hr ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "fs,rr,hr", [(200, 150, 80.0), (200, 200, 60.0), (360, 300, 72.0)]
)
def test_rr_and_hr_examples(fs, rr, hr):
    assert rr_and_hr(1000, 1000 + rr, fs) == (rr, hr)


def test_rr_and_hr_rejects_non_increasing():
    with pytest.raises(FeatureError):
        rr_and_hr(10, 10, 200)
    with pytest.raises(FeatureError):
        rr_and_hr(10, 5, 200)


@given(st.integers(0, 10**6), st.integers(1, 10**4), st.sampled_from([200.0, 250.0, 360.0]))
def test_hr_times_rr(prev, rr, fs):
    got_rr, hr = rr_and_hr(prev, prev + rr, fs)
    assert got_rr == rr
    assert hr * rr == pytest.approx(60 * fs, rel=1e-15)


def test_refine_peak():
    raw = np.zeros(100)
    raw[47] = 3.0
    assert refine_peak(raw, 50, 12) == 47
    assert refine_peak(raw, 70, 12) == 58  # nothing within reach: first of the flat window
    assert refine_peak(raw, -50, 3) == 0


# -- assembly ------------------------------------------------------------------------


def ev(i):
    return QrsEvent(i, i, 1.0, 1.0)


def test_assemble_matches_width_and_peak():
    beats = assemble_beats([ev(100), ev(300)], [(95, 11), (290, 12)], [101, 299], 200.0, 39)
    assert [b.r_peak_index for b in beats] == [62, 260]
    assert [b.qrs_width_samples for b in beats] == [11, 12]
    assert beats[0].rr_interval_samples is None and beats[0].heart_rate_bpm is None
    assert beats[1].rr_interval_samples == 198
    assert beats[1].heart_rate_bpm == 60 * 200.0 / 198
    assert all(b.rpeak_matched for b in beats)


def test_assemble_marks_absent_features():
    beats = assemble_beats([ev(100), ev(300)], [(200, 9)], [], 200.0, 39)
    assert [b.qrs_width_samples for b in beats] == [None, None]
    assert [b.rpeak_matched for b in beats] == [False, False]
    assert [b.r_peak_index for b in beats] == [61, 261]


@settings(max_examples=100)
@given(
    st.lists(st.integers(0, 20000), min_size=1, max_size=40, unique=True),
    st.lists(st.integers(0, 20000), max_size=40),
    st.lists(st.tuples(st.integers(0, 20000), st.integers(1, 30)), max_size=40),
)
def test_assemble_invariants(ev_idx, rpeaks, widths):
    events = [ev(i) for i in sorted(ev_idx)]
    raw = np.sin(np.arange(20100) / 7.0)
    beats = assemble_beats(events, sorted(widths), sorted(rpeaks), 200.0, 39, raw=raw)
    r = [b.r_peak_index for b in beats]
    assert all(b > a for a, b in zip(r, r[1:]))
    for prev, b in zip(beats, beats[1:]):
        assert b.rr_interval_samples == b.r_peak_index - prev.r_peak_index
        assert b.heart_rate_bpm * b.rr_interval_samples == pytest.approx(12000.0, rel=1e-15)
    assert all(b.qrs_width_samples is None or b.qrs_width_samples > 0 for b in beats)


# -- on synthetic trains ------------------------------------------------------------


@pytest.mark.parametrize("bpm", [60, 75, 100, 120])
def test_exact_rr_on_integer_period_trains(bpm):
    period = 60 * 200 // bpm
    rec, ann = synth_beats(200.0, bpm, 1.0, 100.0, 20.0, 0.0, period / 400)
    beats = run_fixed(rec.samples).beats
    assert len(beats) == len(ann)
    assert all(b.rr_interval_samples == period for b in beats[1:])
    assert all(b.heart_rate_bpm == 60 * 200.0 / period for b in beats[1:])
    assert all(b.rr_interval_samples >= 40 for b in beats[1:])


@settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.floats(50, 130), st.floats(60, 110), st.floats(5, 40))
def test_width_monotone_in_lobe_width(bpm, w_ms, extra_ms):
    def median_width(width_ms):
        rec, _ = synth_beats(200.0, bpm, 1.0, width_ms, 15.0, 0.0, 30 / bpm)
        ws = [b.qrs_width_samples for b in run_fixed(rec.samples).beats if b.qrs_width_samples]
        return float(np.median(ws))

    assert median_width(w_ms + extra_ms) >= median_width(w_ms)
