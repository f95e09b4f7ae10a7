"""Synthetic zero-sequence current records.

Fault records start as ``A*sin(2*pi*n/N_T + phi)``. From the onset cycle
on, every zero crossing gets a "zero-off" interval in which the waveform
phase advances at a fraction ``1 - severity`` of its normal rate; the
rest of the half-cycle runs correspondingly faster, so peaks stay at
their original positions and height and no sign change is introduced.
Optional single-sample impulses and white Gaussian noise are then added.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .waveform import Waveform

LABELS = ("A", "B", "C1", "C2", "D", "NONFAULT")
NONFAULT_KINDS = ("noise_only", "harmonic_load", "step_transient")


@dataclass(frozen=True)
class HifParams:
    """Fully resolved generator parameters.

    Lengths (``distortion_width``, ``offset_delta``) are in samples;
    ``impulse_magnitude`` is a multiple of the amplitude. ``snr_db=inf``
    disables noise.
    """

    amplitude_a: float
    severity: float
    distortion_width: float
    offset_delta: float
    impulse_rate: float
    impulse_magnitude: float
    snr_db: float
    onset_cycle: int
    seed: int
    phase: float = 0.0
    label: str = ""

    def validate(self, cycle_len: int) -> None:
        if not 0 <= self.severity <= 1:
            raise ValueError(f"severity must be in [0, 1], got {self.severity}")
        if abs(self.offset_delta) >= cycle_len / 4:
            raise ValueError(f"|offset_delta| must be < N_T/4, got {self.offset_delta}")
        if abs(self.offset_delta) + self.distortion_width / 2 >= cycle_len / 4:
            raise ValueError("distortion interval must stay between the current peaks")
        if self.distortion_width <= 0 or self.impulse_rate < 0 or self.amplitude_a <= 0:
            raise ValueError("distortion_width and amplitude must be positive, impulse_rate >= 0")
        if self.onset_cycle < 0:
            raise ValueError("onset_cycle must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class HifTypePreset:
    """Parameter ranges for one fault type.

    Ranges are ``(low, high)`` tuples; offsets and widths are fractions of
    a cycle. ``offset_abs`` draws the offset magnitude, with a random sign.
    """

    label: str
    severity: tuple[float, float]
    offset_abs: tuple[float, float]
    impulse_rate: tuple[float, float] = (0.0, 0.0)
    impulse_magnitude: tuple[float, float] = (0.0, 0.0)
    width: float = 1 / 8
    amplitude_a: tuple[float, float] = (1.0, 10.0)

    def validate(self) -> None:
        lo, hi = self.severity
        if not 0 <= lo <= hi <= 1:
            raise ValueError(f"{self.label}: bad severity range {self.severity}")
        off_hi = self.offset_abs[1]
        rules = {
            "A": lo >= 0.7 and off_hi <= 1 / 32 and self.impulse_rate[1] == 0,
            "B": lo >= 0.2 and hi <= 0.45 and off_hi <= 1 / 32 and self.impulse_rate[1] == 0,
            "C1": lo >= 0.7 and self.offset_abs[0] >= 1 / 16 and off_hi <= 1 / 8 and self.impulse_rate[1] == 0,
            "C2": lo >= 0.2 and hi <= 0.45 and self.offset_abs[0] >= 1 / 16 and off_hi <= 1 / 8
            and self.impulse_rate[1] == 0,
            "D": self.impulse_rate[0] >= 0.5,
            "NONFAULT": hi == 0 and self.impulse_rate[1] == 0,
        }
        if self.label not in rules:
            raise ValueError(f"unknown type {self.label!r}; valid: {', '.join(LABELS)}")
        if not rules[self.label]:
            raise ValueError(f"preset {self.label} violates its type definition")


PRESETS = {
    "A": HifTypePreset("A", (0.7, 0.95), (0.0, 1 / 32)),
    "B": HifTypePreset("B", (0.42, 0.45), (0.0, 1 / 32)),
    "C1": HifTypePreset("C1", (0.7, 0.95), (1 / 16, 5 / 64)),
    "C2": HifTypePreset("C2", (0.42, 0.45), (1 / 16, 5 / 64)),
    "D": HifTypePreset("D", (0.6, 0.95), (0.0, 1 / 32), (0.5, 1.0), (0.2, 0.5)),
    "NONFAULT": HifTypePreset("NONFAULT", (0.0, 0.0), (0.0, 0.0)),
}


def get_preset(label: str) -> HifTypePreset:
    try:
        preset = PRESETS[label]
    except KeyError:
        raise ValueError(f"unknown type {label!r}; valid: {', '.join(LABELS)}") from None
    preset.validate()
    return preset


def _cycle_len(fs: float, f0: float) -> int:
    # Waveform validates the ratio; build a dummy to reuse the check
    return Waveform(np.zeros(1), fs, f0).cycle_len


def warped_phase(n: np.ndarray, cycle_len: int, phase: float, severity: float, width: float,
                 offset: float, onset_cycle: int) -> np.ndarray:
    """Phase of the distorted waveform at sample positions ``n``.

    Between consecutive peaks of the base sinusoid the phase is piecewise
    linear: slowed by ``1 - severity`` over ``width`` samples centred at
    the base zero crossing plus ``offset``, sped up elsewhere. Half-cycles
    whose zero crossing lies before a quarter cycle ahead of the onset
    cycle start are left untouched, so the first affected half-cycle is the
    one the detector examines first for that cycle.
    """
    omega = 2 * np.pi / cycle_len
    theta = omega * n + phase
    if severity == 0:
        return theta
    half = cycle_len / 2
    # half-cycle k spans base peaks at theta = pi/2 + k*pi
    k = np.floor((theta - np.pi / 2) / np.pi)
    peak = (np.pi / 2 + k * np.pi - phase) / omega
    tau = n - peak
    a = half / 2 + offset - width / 2
    b = a + width
    r_in = 1 - severity
    r_out = (half - r_in * width) / (half - width)
    local = r_out * np.minimum(tau, a) + r_in * np.clip(tau - a, 0, width) + r_out * np.maximum(tau - b, 0)
    crossing = peak + half / 2
    hit = crossing >= onset_cycle * cycle_len - cycle_len / 4
    return np.where(hit, np.pi / 2 + k * np.pi + omega * local, theta)


def add_noise(w: Waveform, snr_db: float, seed: int) -> Waveform:
    """Add white Gaussian noise at exactly ``snr_db`` relative to the record power."""
    if math.isinf(snr_db) and snr_db > 0:
        return w.with_samples(w.samples.copy())
    power = float(np.mean(w.samples ** 2))
    if power == 0:
        raise ValueError("cannot set an SNR on a zero-power record")
    z = np.random.default_rng(seed).standard_normal(len(w))
    z -= z.mean()
    z *= math.sqrt(power / 10 ** (snr_db / 10) / np.mean(z ** 2))
    return w.with_samples(w.samples + z)


def synthesize(params: HifParams, cycles: int, fs: float = 6400.0, f0: float = 50.0) -> Waveform:
    """Deterministic record from fully specified parameters."""
    n_t = _cycle_len(fs, f0)
    params.validate(n_t)
    n = np.arange(cycles * n_t, dtype=float)
    psi = warped_phase(n, n_t, params.phase, params.severity, params.distortion_width,
                       params.offset_delta, params.onset_cycle)
    x = params.amplitude_a * np.sin(psi)
    rng = np.random.default_rng([params.seed, 1])
    if params.impulse_rate > 0:
        for c in range(params.onset_cycle, cycles):
            for _ in range(rng.poisson(params.impulse_rate)):
                pos = c * n_t + int(rng.integers(n_t))
                x[pos] += rng.choice((-1.0, 1.0)) * params.impulse_magnitude * params.amplitude_a
    w = Waveform(x, fs, f0)
    return add_noise(w, params.snr_db, params.seed)


def draw_params(preset: HifTypePreset, cycle_len: int, seed: int, snr_db: float = 25.0,
                onset_cycle: int = 10) -> HifParams:
    rng = np.random.default_rng([seed, 0])
    off = rng.uniform(*preset.offset_abs) * cycle_len * rng.choice((-1.0, 1.0))
    return HifParams(
        amplitude_a=float(rng.uniform(*preset.amplitude_a)),
        severity=float(rng.uniform(*preset.severity)),
        distortion_width=preset.width * cycle_len,
        offset_delta=float(off),
        impulse_rate=float(rng.uniform(*preset.impulse_rate)),
        impulse_magnitude=float(rng.uniform(*preset.impulse_magnitude)),
        snr_db=snr_db,
        onset_cycle=onset_cycle,
        seed=seed,
        phase=float(rng.uniform(0, 2 * np.pi)),
        label=preset.label,
    )


def gen_hif(preset, cycles: int = 40, fs: float = 6400.0, f0: float = 50.0, seed: int = 0,
            snr_db: float = 25.0, onset_cycle: int = 10) -> tuple[Waveform, HifParams]:
    """Random record of the given fault type (label or preset)."""
    if isinstance(preset, str):
        preset = get_preset(preset)
    else:
        preset.validate()
    if cycles <= onset_cycle:
        raise ValueError(f"cycles ({cycles}) must exceed onset_cycle ({onset_cycle})")
    params = draw_params(preset, _cycle_len(fs, f0), seed, snr_db, onset_cycle)
    return synthesize(params, cycles, fs, f0), params


def gen_nonfault(kind: str, cycles: int = 40, fs: float = 6400.0, f0: float = 50.0,
                 snr_db: float = 30.0, seed: int = 0) -> Waveform:
    """Non-fault record: plain sinusoid, harmonic load or switching transient."""
    if kind not in NONFAULT_KINDS:
        raise ValueError(f"unknown kind {kind!r}; valid: {', '.join(NONFAULT_KINDS)}")
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    n_t = _cycle_len(fs, f0)
    rng = np.random.default_rng([seed, 2])
    amp = rng.uniform(1.0, 10.0)
    n = np.arange(cycles * n_t, dtype=float)
    theta = 2 * np.pi * n / n_t + rng.uniform(0, 2 * np.pi)
    x = amp * np.sin(theta)
    if kind == "harmonic_load":
        # flat-topped third harmonic; a peaked one flattens the zero crossings
        # and reads as a genuine zero-off distortion
        x += rng.uniform(0.03, 0.06) * amp * np.sin(3 * theta + rng.uniform(-np.pi / 6, np.pi / 6))
        for h in (5, 7):
            x += rng.uniform(0.005, 0.015) * amp * np.sin(h * theta + rng.uniform(0, 2 * np.pi))
    elif kind == "step_transient":
        c = int(rng.integers(1, max(cycles - 1, 2)))
        t = (n - c * n_t) / fs
        f_osc = 800.0 * rng.uniform(0.9, 1.1)
        tau = 1 / (5 * f0)  # decays to ~1% within one cycle
        burst = rng.uniform(0.2, 0.6) * amp * np.exp(-t / tau) * np.sin(2 * np.pi * f_osc * t)
        x += np.where((t >= 0) & (t < 1 / f0), burst, 0.0)
    return add_noise(Waveform(x, fs, f0), snr_db, seed)


def hf_energy_ratio(w: Waveform, band_hz: tuple[float, float] = (1000.0, 3000.0)) -> float:
    """Share of record energy in ``band_hz``: a naive high-frequency indicator."""
    spec = np.abs(np.fft.rfft(w.samples)) ** 2
    freqs = np.fft.rfftfreq(len(w), 1 / w.sample_rate_hz)
    band = (freqs >= band_hz[0]) & (freqs <= band_hz[1])
    return float(spec[band].sum() / spec.sum())


def hf_calibration(labels=("A", "B", "C1", "C2"), seeds=range(100), fs: float = 6400.0, f0: float = 50.0,
                   cycles: int = 40, onset_cycle: int = 10) -> dict[str, tuple[float, float]]:
    """Range of ``hf_energy_ratio`` over noise-free, post-onset records per label.

    Used to check the preset calibration: a naive high-frequency detector
    whose threshold catches every Type A record (the smallest A ratio)
    must miss every Type B record, i.e. ``max(B) < min(A)``.
    """
    n_t = _cycle_len(fs, f0)
    out = {}
    for lab in labels:
        ratios = []
        for seed in seeds:
            w, _ = gen_hif(lab, cycles, fs, f0, seed, math.inf, onset_cycle)
            ratios.append(hf_energy_ratio(w.with_samples(w.samples[onset_cycle * n_t:])))
        out[lab] = (min(ratios), max(ratios))
    return out
