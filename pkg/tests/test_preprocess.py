import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import signal

from hifdetect import CycleWindow, FilterSpec, Waveform, calibrate_extremum, locate_cycle_extrema, lowpass_filter
from hifdetect.preprocess import NoSignalError, fir_taps, fundamental_phasor
from hifdetect.slope import IntervalSlopeCurve

from conftest import FS, N_T, sinusoid


def test_filter_response_against_freqz():
    taps = fir_taps(FilterSpec(), FS)
    assert taps.size % 2 == 1
    np.testing.assert_allclose(taps, taps[::-1])
    freqs, h = signal.freqz(taps, worN=8192, fs=FS)
    mag = 20 * np.log10(np.abs(h) + 1e-300)
    assert abs(np.interp(50.0, freqs, mag)) < 0.5
    assert mag[freqs >= 2000.0].max() <= -60.0 + 0.5


def test_filter_is_zero_phase_and_keeps_length():
    w = sinusoid(10, amp=3.0, phase=0.7)
    y = lowpass_filter(w)
    assert len(y) == len(w)
    assert y.warmup == fir_taps(FilterSpec(), FS).size // 2
    a, b = y.valid_range
    np.testing.assert_allclose(y.samples[a:b + 1], w.samples[a:b + 1], atol=3.0 * 0.01)


def test_filter_removes_high_frequency():
    n = np.arange(20 * N_T)
    x = np.sin(2 * np.pi * n / N_T) + 0.5 * np.sin(2 * np.pi * 2800.0 * n / FS)
    y = lowpass_filter(Waveform(x, FS))
    a, b = y.valid_range
    resid = y.samples[a:b + 1] - np.sin(2 * np.pi * n[a:b + 1] / N_T)
    assert np.abs(resid).max() < 0.5 * 10 ** (-55 / 20)


@pytest.mark.parametrize("spec", [FilterSpec(cutoff_hz=3300.0), FilterSpec(cutoff_hz=400.0)])
def test_filter_spec_validation(spec):
    with pytest.raises(ValueError):
        lowpass_filter(sinusoid(10), spec)


def test_filter_rejects_short_record():
    with pytest.raises(ValueError, match="shorter"):
        lowpass_filter(Waveform(np.ones(40), FS))


@given(st.floats(0.1, 100.0), st.floats(0, 2 * np.pi))
def test_phasor_matches_fft(amp, phase):
    x = amp * np.cos(2 * np.pi * np.arange(N_T) / N_T + phase) + 0.2 * amp
    ph = fundamental_phasor(x)
    assert ph == pytest.approx(2 / N_T * np.fft.fft(x)[1], rel=1e-9, abs=1e-9)
    assert abs(ph) == pytest.approx(amp, rel=1e-9)


@pytest.mark.parametrize("phase", np.linspace(0, 2 * np.pi, 9)[:-1])
def test_extrema_land_on_the_peaks(phase):
    w = sinusoid(4, amp=2.0, phase=phase)
    ext = locate_cycle_extrema(w, CycleWindow(N_T, N_T))
    x = w.samples
    assert N_T <= ext.n_max_current < 2 * N_T
    assert x[ext.n_max_current] >= 2.0 * np.cos(np.pi / N_T) - 1e-9
    assert x[ext.n_min_current] <= -2.0 * np.cos(np.pi / N_T) + 1e-9
    assert ext.n_min_current - ext.n_max_current == N_T // 2
    assert ext.n_max_current - ext.n_prev == N_T // 2
    assert ext.amplitude == pytest.approx(2.0)


def test_no_signal():
    with pytest.raises(NoSignalError):
        locate_cycle_extrema(Waveform(np.zeros(2 * N_T), FS), CycleWindow(0, N_T))


def _curve(values, first=0):
    return IntervalSlopeCurve(np.asarray(values, float), first)


def test_calibrate_keeps_strict_minimum():
    v = np.abs(np.arange(40) - 20.0)
    assert calibrate_extremum(20, _curve(v), 8) == 20


def test_calibrate_finds_v_bottom():
    v = np.abs(np.arange(40) - 23.0)
    assert calibrate_extremum(20, _curve(v), 8) == 23


def test_calibrate_tie_prefers_nearest_then_lower():
    v = np.ones(40)
    v[[14, 25]] = 0.0
    assert calibrate_extremum(20, _curve(v), 8) == 25
    v[15] = 0.0
    # 15 and 25 are both five away
    assert calibrate_extremum(20, _curve(v), 8) == 15


def test_calibrate_outside_domain():
    with pytest.raises(ValueError):
        calibrate_extremum(3, _curve(np.ones(40)), 8)
