import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hifdetect import Waveform

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FS = 6400.0
F0 = 50.0
N_T = 128


def sinusoid(cycles=40, amp=5.0, phase=0.3, fs=FS, f0=F0):
    n_t = int(round(fs / f0))
    n = np.arange(cycles * n_t)
    return Waveform(amp * np.sin(2 * np.pi * n / n_t + phase), fs, f0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
