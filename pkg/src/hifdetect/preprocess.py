"""Low-pass filtering and per-cycle location of current extrema."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal

from .waveform import CycleWindow, Waveform

NO_SIGNAL_FLOOR = 1e-6


class NoSignalError(ValueError):
    """Fundamental component too small to locate the current extrema."""


@dataclass(frozen=True)
class FilterSpec:
    cutoff_hz: float = 1500.0
    transition_width_hz: float = 500.0
    stopband_attenuation_db: float = 60.0

    def validate(self, sample_rate_hz: float, fundamental_hz: float) -> None:
        if min(self.cutoff_hz, self.transition_width_hz, self.stopband_attenuation_db) <= 0:
            raise ValueError("filter parameters must be positive")
        if self.cutoff_hz >= sample_rate_hz / 2:
            raise ValueError(f"cutoff {self.cutoff_hz} Hz must be below Nyquist {sample_rate_hz / 2} Hz")
        if self.cutoff_hz < 10 * fundamental_hz:
            raise ValueError(f"cutoff {self.cutoff_hz} Hz must be at least 10x the fundamental")


@dataclass(frozen=True)
class CycleExtrema:
    n_max_current: int
    n_min_current: int
    n_prev: int
    amplitude: float = float("nan")


@lru_cache(maxsize=32)
def fir_taps(spec: FilterSpec, sample_rate_hz: float) -> np.ndarray:
    """Kaiser-windowed sinc with passband edge at the cutoff and stopband
    edge at cutoff + transition width. Always an odd number of taps."""
    nyq = sample_rate_hz / 2
    numtaps, beta = signal.kaiserord(spec.stopband_attenuation_db, spec.transition_width_hz / nyq)
    numtaps |= 1
    edge = min(spec.cutoff_hz + spec.transition_width_hz / 2, nyq * 0.999)
    taps = signal.firwin(numtaps, edge, window=("kaiser", beta), fs=sample_rate_hz)
    taps.setflags(write=False)
    return taps


def lowpass_filter(w: Waveform, spec: FilterSpec = FilterSpec()) -> Waveform:
    """Zero-phase FIR low-pass.

    The symmetric kernel is centred on each output sample, so the group
    delay is removed exactly. The first and last half-span samples are
    computed against implicit zeros and flagged through ``warmup``.
    """
    spec.validate(w.sample_rate_hz, w.fundamental_hz)
    taps = fir_taps(spec, w.sample_rate_hz)
    if len(w) < 2 * taps.size:
        raise ValueError(f"record of {len(w)} samples is shorter than twice the filter span ({taps.size})")
    y = np.convolve(w.samples, taps, mode="same")
    return w.with_samples(y, warmup=w.warmup + taps.size // 2)


def fundamental_phasor(x: np.ndarray) -> complex:
    """Single-bin DFT of one cycle, scaled to the peak amplitude."""
    n = x.size
    k = np.arange(n)
    return complex(2.0 / n * np.dot(x, np.exp(-2j * np.pi * k / n)))


def locate_cycle_extrema(w: Waveform, cycle: CycleWindow, floor: float = NO_SIGNAL_FLOOR) -> CycleExtrema:
    """Positions of the fundamental's maximum and minimum within a cycle.

    Returned indices are absolute sample indices; ``n_prev`` may precede
    the cycle start (and the record) by up to half a cycle.
    """
    n_t = w.cycle_len
    if cycle.length != n_t:
        raise ValueError(f"cycle length {cycle.length} != samples per cycle {n_t}")
    cycle.check_inside(w)
    phasor = fundamental_phasor(w.samples[cycle.start_index:cycle.stop])
    amp = abs(phasor)
    if amp < floor:
        raise NoSignalError(f"fundamental {amp:.3g} A below floor {floor:g} A at sample {cycle.start_index}")
    # fundamental ~ amp*cos(2*pi*k/n_t + angle): peak where the argument wraps to 0
    offset = math.floor(-np.angle(phasor) * n_t / (2 * np.pi) + 0.5) % n_t
    n1 = cycle.start_index + offset
    return CycleExtrema(n1, n1 + n_t // 2, n1 - n_t // 2, amp)


def calibrate_extremum(candidate: int, slope, radius: int) -> int:
    """Move ``candidate`` to the smallest interval slope within ``radius``.

    Ties go to the index closest to the candidate, then the smaller index.
    """
    lo, hi = candidate - radius, candidate + radius
    vals = slope.segment(lo, hi)
    idx = np.arange(lo, hi + 1)
    best = np.flatnonzero(vals == vals.min())
    dist = np.abs(idx[best] - candidate)
    return int(idx[best[dist == dist.min()][0]])
