from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from hifdetect import DetectorConfig, SlopeConfig, Waveform, analyze_half_cycle, detect
from hifdetect.detector import count_level_crossings, first_trip, local_minima
from hifdetect.slope import IntervalSlopeCurve
from hifdetect.synth import HifParams, add_noise, gen_hif, synthesize

from conftest import FS, N_T, sinusoid

CFG = DetectorConfig().resolve(N_T)


def _curve(values, first=-1):
    return IntervalSlopeCurve(np.asarray(values, float), first)


def m_lobe(depth=0.1, side=20, mid=12):
    up = np.linspace(0, 1, side + 1)
    down = np.linspace(1, depth, mid + 1)[1:]
    back = np.linspace(depth, 1, mid + 1)[1:]
    fall = np.linspace(1, 0, side + 1)[1:]
    return np.concatenate([up, down, back, fall])


def analyze(v, cfg=CFG):
    # pad one sample each side for the neighbour test
    v = np.concatenate([[v[1]], v, [v[-2]]])
    return analyze_half_cycle(_curve(v), 0, v.size - 3, cfg)


def test_crossings_simple():
    c = _curve([0, 1, 2, 1, 0, 1, 2], first=0)
    assert count_level_crossings(c, (0, 6), 1.5) == 3
    assert count_level_crossings(c, (0, 2), 1.5) == 1


def test_crossings_touching_level_counts_once():
    c = _curve([0, 1, 1, 1, 2], first=0)
    assert count_level_crossings(c, (0, 4), 1.0) == 1
    c = _curve([0, 1, 0], first=0)
    assert count_level_crossings(c, (0, 2), 1.0) == 0


def test_local_minima_plateau_collapses():
    v = np.array([3, 2, 1, 1, 1, 2, 3, 0.5, 4])
    assert local_minima(v, 1, 7) == [2, 7]


def test_m_lobe_passes():
    v = analyze(m_lobe())
    assert v.passed and v.reason is None
    assert (v.num_c1, v.num_c2) == (2, 2)
    assert v.n_min0 == 32 and v.is_min0 == pytest.approx(0.1)
    assert v.is_max1 == pytest.approx(1.0) and v.is_max2 == pytest.approx(1.0)


def test_lambda_lobe_has_no_minimum():
    v = analyze(np.sin(np.linspace(0, np.pi, 65)))
    assert not v.passed and v.reason == "no_min"


def test_shallow_dip_fails_depth():
    v = analyze(m_lobe(depth=0.9))
    assert v.reason == "eq6"


def test_minimum_near_edge_is_ignored():
    v = np.sin(np.linspace(0, np.pi, 65))
    v[4] = 0.0
    assert analyze(v).reason == "no_min"


def test_extra_minimum_of_equal_depth_passes():
    v = m_lobe()
    v[36] = 0.1
    v[35] = 0.2
    res = analyze(v)
    assert res.passed and [n for n, _ in res.extra_minima] == [36]


def test_extra_minimum_outside_maxima_fails():
    v = m_lobe(side=24, mid=8)
    v[50] = v[50] - 0.3
    res = analyze(v)
    assert res.reason == "eq9"
    assert res.extra_minima and not res.n_max1 < res.extra_minima[0][0] < res.n_max2


def test_double_crossing_fails():
    v = m_lobe()
    v[8] = 0.9
    assert analyze(v).reason == "eq6"


@st.composite
def bumpy(draw):
    n = np.arange(65)
    v = np.sin(np.pi * n / 64)
    for _ in range(draw(st.integers(0, 3))):
        c = draw(st.floats(8, 56))
        a = draw(st.floats(-0.9, 0.5))
        width = draw(st.floats(2, 10))
        v = v + a * np.exp(-((n - c) / width) ** 2)
    return np.abs(v + draw(st.floats(0, 0.05)) * np.cos(draw(st.floats(0.5, 3)) * n))


@given(bumpy(), st.floats(0.5, 0.95), st.floats(0.0, 0.2))
def test_monotone_in_kset1(v, k, dk):
    lo = analyze(v, replace(CFG, k_set1=k))
    hi = analyze(v, replace(CFG, k_set1=min(k + dk, 0.99)))
    assert not lo.passed or hi.passed


@given(bumpy(), st.floats(0.02, 0.5), st.floats(0.0, 0.3))
def test_monotone_in_kset2(v, k, dk):
    lo = analyze(v, replace(CFG, k_set2=k))
    hi = analyze(v, replace(CFG, k_set2=min(k + dk, 0.99)))
    assert not lo.passed or hi.passed


def test_first_trip():
    flags = [(i, i >= 10) for i in range(20)]
    assert first_trip(flags, 5) == 14
    assert first_trip([(i, i % 2 == 0) for i in range(40)], 5) is None
    assert first_trip([(1, True), (2, True), (4, True), (5, True)], 3) is None
    assert first_trip([(0, True)], 1) == 0


@pytest.mark.parametrize("kw", [dict(k_set1=1.0), dict(k_set2=0.0), dict(d=40), dict(confirm_cycles=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        DetectorConfig(**kw).resolve(N_T)


def test_clean_sinusoid_never_faulty():
    w = add_noise(sinusoid(40, amp=5.0), 30.0, seed=3)
    r = detect(w)
    assert r.faulty_cycles == [] and r.trip_cycle is None
    assert r.cycles and all(c.halves is not None for c in r.cycles)


def test_severe_distortion_trips_at_14():
    w, p = gen_hif("A", seed=4, snr_db=np.inf)
    r = detect(w)
    assert r.trip_cycle == 14
    assert all(c.faulty == (c.index >= 10) for c in r.cycles)


def test_trip_never_before_onset_plus_confirm():
    for seed in range(5):
        w, p = gen_hif("C1", seed=seed, snr_db=30.0, onset_cycle=12)
        r = detect(w)
        assert r.trip_cycle is None or r.trip_cycle >= 12 + 5 - 1


def test_short_record_rejected():
    with pytest.raises(ValueError, match="usable cycles"):
        detect(sinusoid(6))


def test_silent_channel_is_not_faulty():
    r = detect(Waveform(np.zeros(20 * N_T), FS))
    assert r.trip_cycle is None
    assert {c.note for c in r.cycles} == {"no_signal"}


def test_below_floor_is_not_faulty():
    w, _ = gen_hif("A", seed=1, snr_db=np.inf)
    r = detect(w.scaled(1e-3 / np.abs(w.samples).max()))
    assert r.trip_cycle is None and r.cycles[12].note == "below_floor"


@pytest.mark.parametrize("c", [0.1, 10.0])
def test_amplitude_invariance(c):
    w, _ = gen_hif("B", seed=2, snr_db=25.0)
    base = detect(w)
    scaled = detect(w.scaled(c), det_cfg=DetectorConfig(min_current_floor=0.05 * c))
    assert [x.faulty for x in scaled.cycles] == [x.faulty for x in base.cycles]


def test_deterministic():
    w, _ = gen_hif("D", seed=9)
    assert detect(w).to_dict() == detect(w).to_dict()


def test_shift_by_one_cycle():
    w, _ = gen_hif("C2", seed=5, snr_db=30.0)
    a = detect(w)
    b = detect(w.with_samples(w.samples[N_T:]))
    fa = {c.index: c.faulty for c in a.cycles}
    fb = {c.index + 1: c.faulty for c in b.cycles}
    common = set(fa) & set(fb)
    assert len(common) >= 35
    assert all(fa[k] == fb[k] for k in common)


def test_config_echo():
    r = detect(sinusoid(12))
    assert r.config["detector"]["k_set1"] == 0.83 and r.config["detector"]["d"] == 8
    assert r.config["slope"]["window_len"] == 16 and r.config["filter"]["cutoff_hz"] == 1500.0


def test_severity_one_has_flat_windows():
    p = HifParams(2.0, 1.0, 16, 0.0, 0.0, 0.0, np.inf, 0, 0, 0.0)
    w = synthesize(p, 12)
    r = detect(w)
    assert all(c.faulty for c in r.cycles)
    assert r.trip_cycle == r.cycles[0].index + 4
