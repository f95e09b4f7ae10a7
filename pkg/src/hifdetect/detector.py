"""Cycle-by-cycle "double M" detection on the interval-slope curve."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .grubbs import DEFAULT_TABLE, GrubbsTable
from .preprocess import (
    FilterSpec,
    NoSignalError,
    calibrate_extremum,
    locate_cycle_extrema,
    lowpass_filter,
)
from .report import CycleRecord, DetectionReport, HalfCycleVerdict
from .slope import IntervalSlopeCurve, SlopeConfig, interval_slope_curve
from .waveform import CycleWindow, Waveform

FLAT_TOL = 1e-12


@dataclass(frozen=True)
class DetectorConfig:
    """Judgment thresholds.

    ``d`` and ``calibration_radius`` default to a sixteenth of a cycle when
    left as ``None``.
    """

    k_set1: float = 0.83
    k_set2: float = 0.10
    d: int | None = None
    confirm_cycles: int = 5
    min_current_floor: float = 0.05
    calibration_radius: int | None = None

    def resolve(self, cycle_len: int) -> "DetectorConfig":
        cfg = replace(
            self,
            d=cycle_len // 16 if self.d is None else self.d,
            calibration_radius=cycle_len // 16 if self.calibration_radius is None else self.calibration_radius,
        )
        cfg.validate(cycle_len)
        return cfg

    def validate(self, cycle_len: int) -> None:
        if not 0 < self.k_set1 < 1:
            raise ValueError(f"k_set1 must be in (0, 1), got {self.k_set1}")
        if not 0 < self.k_set2 < 1:
            raise ValueError(f"k_set2 must be in (0, 1), got {self.k_set2}")
        if self.d is None or self.d < 0 or 2 * self.d >= cycle_len / 2 - 4:
            raise ValueError(f"d must satisfy 0 <= 2d < N_T/2 - 4, got {self.d}")
        if self.confirm_cycles < 1:
            raise ValueError("confirm_cycles must be >= 1")
        if self.min_current_floor < 0:
            raise ValueError("min_current_floor must be non-negative")
        if self.calibration_radius is None or self.calibration_radius < 0:
            raise ValueError("calibration_radius must be non-negative")


def count_level_crossings(curve: IntervalSlopeCurve, interval: tuple[int, int], level: float) -> int:
    """Number of times the curve passes through ``level`` strictly inside ``interval``.

    Adjacent samples ``a..b`` are compared, so a crossing located between
    ``b-1`` and ``b`` is counted. A run of samples exactly on the level
    counts once if the curve is on opposite sides before and after it.
    """
    a, b = interval
    if b <= a:
        raise ValueError(f"empty interval ({a}, {b})")
    s = np.sign(curve.segment(a, b) - level)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def local_minima(v: np.ndarray, lo: int, hi: int) -> list[int]:
    """Indices n in ``lo..hi`` (positions into ``v``) with v[n-1] >= v[n] <= v[n+1].

    Consecutive qualifying indices with equal value are a plateau and
    collapse to the leftmost one.
    """
    out = []
    prev_hit = False
    for n in range(max(lo, 1), min(hi, v.size - 2) + 1):
        hit = v[n - 1] >= v[n] <= v[n + 1]
        if hit and not (prev_hit and v[n - 1] == v[n]):
            out.append(n)
        prev_hit = hit
    return out


def analyze_half_cycle(curve: IntervalSlopeCurve, n_a: int, n_b: int, cfg: DetectorConfig) -> HalfCycleVerdict:
    """Check one half-cycle ``[n_a, n_b]`` for the split-hump signature."""
    if n_b <= n_a:
        raise ValueError(f"n_a={n_a} must precede n_b={n_b}")
    d = cfg.d if cfg.d is not None else 0
    # one extra sample each side for the neighbour comparisons
    base = n_a - 1
    v = curve.segment(n_a - 1, n_b + 1)
    verdict = HalfCycleVerdict(n_a, n_b, False)

    if np.ptp(v) <= FLAT_TOL * max(1.0, float(np.max(v))):
        verdict.reason = "flat"
        return verdict

    minima = [m + base for m in local_minima(v, n_a + d - base, n_b - d - base)]
    if not minima:
        verdict.reason = "no_min"
        return verdict

    def at(n):
        return float(v[n - base])

    n0 = minima[0]
    if n0 - n_a < 2 or n_b - n0 < 2:
        verdict.reason = "no_min"
        return verdict
    left = v[n_a + 1 - base:n0 - base]
    right = v[n0 + 1 - base:n_b - base]
    n_max1 = n_a + 1 + int(np.argmax(left))
    n_max2 = n0 + 1 + int(np.argmax(right))
    is0, is1, is2 = at(n0), at(n_max1), at(n_max2)
    mean_max = (is1 + is2) / 2
    c1 = count_level_crossings(curve, (n_a, n0), (is0 + is1) / 2)
    c2 = count_level_crossings(curve, (n0, n_b), (is0 + is2) / 2)
    verdict.n_min0, verdict.n_max1, verdict.n_max2 = n0, n_max1, n_max2
    verdict.is_min0, verdict.is_max1, verdict.is_max2 = is0, is1, is2
    verdict.num_c1, verdict.num_c2 = c1, c2

    if not (is0 <= cfg.k_set1 * mean_max and c1 == 2 and c2 == 2):
        verdict.reason = "eq6"
        return verdict

    depth0 = mean_max - is0
    ok = True
    for n in minima[1:]:
        ratio = (mean_max - at(n)) / depth0 if depth0 > 0 else float("inf")
        verdict.extra_minima.append((n, ratio))
        inside = n_max1 < n < n_max2
        if not (inside and 1 - cfg.k_set2 <= ratio <= 1 + cfg.k_set2):
            ok = False
    if not ok:
        verdict.reason = "eq9"
        return verdict
    verdict.passed = True
    return verdict


def first_trip(faulty: list[tuple[int, bool]], confirm: int) -> int | None:
    """Index of the cycle completing the first run of ``confirm`` faulty cycles.

    ``faulty`` is ``(cycle index, flag)`` in index order; a gap in the
    indices breaks a run.
    """
    run, prev = 0, None
    for idx, flag in faulty:
        if not flag:
            run = 0
        elif prev is not None and idx == prev + 1:
            run += 1
        else:
            run = 1
        prev = idx
        if run >= confirm:
            return idx
    return None


def config_echo(slope_cfg: SlopeConfig, det_cfg: DetectorConfig, filt: FilterSpec) -> dict:
    return {"filter": asdict(filt), "slope": asdict(slope_cfg), "detector": asdict(det_cfg)}


def analyze_cycles(filtered: Waveform, curve: IntervalSlopeCurve, det_cfg: DetectorConfig) -> list[CycleRecord]:
    n_t = filtered.cycle_len
    half = n_t // 2
    r = det_cfg.calibration_radius
    # N_0 .. N_2 spans at most 1.5 cycles around the cycle, plus calibration
    # reach and one neighbour sample for the minimum test
    margin = r + 1
    records = []
    for k in range(filtered.n_cycles):
        start = k * n_t
        if start - half - margin < curve.first_valid or start + n_t + half + margin > curve.last_valid:
            continue
        try:
            ext = locate_cycle_extrema(filtered, CycleWindow(start, n_t))
        except NoSignalError:
            records.append(CycleRecord(k, False, 0.0, None, "no_signal"))
            continue
        n1 = calibrate_extremum(ext.n_max_current, curve, r)
        n0 = calibrate_extremum(ext.n_prev, curve, r)
        n2 = calibrate_extremum(ext.n_min_current, curve, r)
        h1 = analyze_half_cycle(curve, n0, n1, det_cfg)
        h2 = analyze_half_cycle(curve, n1, n2, det_cfg)
        strong = ext.amplitude >= det_cfg.min_current_floor
        records.append(CycleRecord(k, bool(h1.passed and h2.passed and strong), float(ext.amplitude),
                                   (h1, h2), None if strong else "below_floor"))
    return records


def prepare(w: Waveform, slope_cfg: SlopeConfig = SlopeConfig(), filt: FilterSpec = FilterSpec(),
            table: GrubbsTable = DEFAULT_TABLE, confirm_cycles: int = 5) -> tuple[Waveform, IntervalSlopeCurve]:
    """Filtered record and its interval-slope curve; the threshold-free part of ``detect``."""
    n_t = w.cycle_len
    slope_cfg = slope_cfg.resolve(n_t)
    filtered = lowpass_filter(w, filt)
    a, b = filtered.valid_range
    if (b - a + 1) // n_t < confirm_cycles + 2:
        raise ValueError(
            f"record has {(b - a + 1) / n_t:.1f} usable cycles, need {confirm_cycles + 2}"
        )
    return filtered, interval_slope_curve(filtered, slope_cfg, table)


def judge(filtered: Waveform, curve: IntervalSlopeCurve, det_cfg: DetectorConfig,
          config: dict | None = None) -> DetectionReport:
    """Per-cycle verdicts and trip decision for a prepared record."""
    det_cfg = det_cfg.resolve(filtered.cycle_len)
    records = analyze_cycles(filtered, curve, det_cfg)
    trip = first_trip([(c.index, c.faulty) for c in records], det_cfg.confirm_cycles)
    return DetectionReport(records, trip, config or {})


def detect(w: Waveform, slope_cfg: SlopeConfig = SlopeConfig(), det_cfg: DetectorConfig = DetectorConfig(),
           filt: FilterSpec = FilterSpec(), table: GrubbsTable = DEFAULT_TABLE) -> DetectionReport:
    """Filter, compute the interval slope and judge every complete cycle."""
    n_t = w.cycle_len
    slope_cfg = slope_cfg.resolve(n_t)
    det_cfg = det_cfg.resolve(n_t)
    filtered, curve = prepare(w, slope_cfg, filt, table, det_cfg.confirm_cycles)
    return judge(filtered, curve, det_cfg, config_echo(slope_cfg, det_cfg, filt))
