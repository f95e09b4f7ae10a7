import numpy as np
import pytest
from hypothesis import given, strategies as st

from hifdetect import CycleWindow, Waveform, load_waveform_csv, write_waveform_csv

from conftest import sinusoid


def test_default_cycle_length():
    assert Waveform(np.zeros(10), 6400.0).cycle_len == 128


def test_6khz_gives_120():
    assert Waveform(np.zeros(10), 6000.0, 50.0).cycle_len == 120


@pytest.mark.parametrize("fs, f0", [(6425.0, 50.0), (1000.0, 50.0), (6400.0, 60.0)])
def test_rejects_bad_cycle_length(fs, f0):
    with pytest.raises(ValueError, match="samples per cycle"):
        Waveform(np.zeros(10), fs, f0)


@pytest.mark.parametrize("samples", [[], [1.0, np.nan], [np.inf]])
def test_rejects_bad_samples(samples):
    with pytest.raises(ValueError):
        Waveform(np.asarray(samples, float), 6400.0)


def test_samples_are_read_only():
    w = sinusoid(2)
    with pytest.raises(ValueError):
        w.samples[0] = 1.0


def test_valid_range_and_cycles():
    w = sinusoid(3).with_samples(np.ones(384), warmup=23)
    assert w.valid_range == (23, 360)
    assert w.n_cycles == 3


def test_cycle_window_bounds():
    w = sinusoid(2)
    CycleWindow(128, 128).check_inside(w)
    with pytest.raises(ValueError):
        CycleWindow(200, 128).check_inside(w)


def test_csv_round_trip_128_rows(tmp_path):
    w = sinusoid(1, amp=1.0, phase=0.0)
    path = tmp_path / "one.csv"
    write_waveform_csv(w, path)
    back = load_waveform_csv(path, 6400.0)
    assert back.cycle_len == 128 and len(back) == 128
    np.testing.assert_allclose(back.samples, w.samples, rtol=1e-11, atol=1e-12)


def test_csv_single_column_no_header(tmp_path):
    path = tmp_path / "bare.csv"
    path.write_text("1.5\n-2\n3e-3\n")
    np.testing.assert_array_equal(load_waveform_csv(path, 6400.0).samples, [1.5, -2.0, 0.003])


def test_csv_names_bad_row(tmp_path):
    lines = ["time_s,i0_a"] + [f"{i / 6400},{i}" for i in range(5)] + ["0.1,abc"]
    path = tmp_path / "bad.csv"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="row 7"):
        load_waveform_csv(path, 6400.0)


def test_csv_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_waveform_csv(tmp_path / "nope.csv", 6400.0)


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=50))
def test_csv_round_trip_12_digits(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "x.csv"
    w = Waveform(np.asarray(values), 6400.0)
    write_waveform_csv(w, path, with_time=False)
    back = load_waveform_csv(path, 6400.0).samples
    np.testing.assert_allclose(back, w.samples, rtol=1e-11, atol=1e-300)
