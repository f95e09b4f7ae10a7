"""Interval slope of a current record with Grubbs-screened local fits.

Each window of ``l`` samples is fitted with a weighted polynomial and
samples whose residual is a Grubbs outlier are dropped until the fit is
clean. With ``outlier_handling="smooth"`` (default) every sample is
replaced by its window's screened fit and the interval slope is the
least-squares line slope of the smoothed samples over the interval.
``"exclude"`` and ``"impute"`` instead screen each interval on its own
and fit the line to the survivors, or to the survivors plus fitted values
in place of the outliers.

The default statistic tests signed residuals with the two-sided maximum
Grubbs form; ``grubbs_statistic="squared"`` tests each weighted squared
residual against the threshold instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .grubbs import CONFIDENCES, DEFAULT_TABLE, MIN_N, GrubbsTable
from .waveform import Waveform

COND_LIMIT = 1e10


@dataclass(frozen=True)
class SlopeConfig:
    """Interval-slope settings.

    ``window_len=None`` means one eighth of a cycle. ``grubbs_n`` selects
    whether the Grubbs threshold is looked up with the current retained
    count or with the full window length.
    """

    window_len: int | None = None
    poly_order: int = 2
    grubbs_confidence: float = 0.90
    stride: int = 1
    min_retained_fraction: float = 0.6
    residual_floor: float = 1e-12
    relative_floor: float = 1e-3
    outlier_handling: Literal["smooth", "exclude", "impute"] = "smooth"
    grubbs_n: Literal["retained", "window"] = "retained"
    grubbs_statistic: Literal["squared", "residual"] = "residual"

    def resolve(self, cycle_len: int) -> "SlopeConfig":
        # an eighth of a cycle, rounded to an even count
        default = 2 * max(3, int(cycle_len / 16 + 0.5))
        cfg = self if self.window_len is not None else replace(self, window_len=default)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        l = self.window_len
        if l is None or l < 6 or l % 2:
            raise ValueError(f"window_len must be even and >= 6, got {l}")
        if not 0 <= self.poly_order < l - 1:
            raise ValueError(f"poly_order must be in [0, {l - 2}], got {self.poly_order}")
        if not 1 <= self.stride <= l // 4:
            raise ValueError(f"stride must be in [1, {l // 4}], got {self.stride}")
        if not any(math.isclose(self.grubbs_confidence, c) for c in CONFIDENCES):
            raise ValueError(f"grubbs_confidence must be one of {CONFIDENCES}")
        if not 0 < self.min_retained_fraction <= 1:
            raise ValueError("min_retained_fraction must be in (0, 1]")
        if self.residual_floor <= 0:
            raise ValueError("residual_floor must be positive")
        if self.relative_floor < 0:
            raise ValueError("relative_floor must be non-negative")
        if self.grubbs_statistic not in ("squared", "residual"):
            raise ValueError(f"unknown grubbs_statistic {self.grubbs_statistic!r}")
        if self.outlier_handling not in ("smooth", "exclude", "impute"):
            raise ValueError(f"unknown outlier_handling {self.outlier_handling!r}")
        if self.grubbs_n not in ("retained", "window"):
            raise ValueError(f"unknown grubbs_n {self.grubbs_n!r}")

    @property
    def min_retained(self) -> int:
        return max(MIN_N, math.ceil(self.min_retained_fraction * self.window_len - 1e-9))


@dataclass(frozen=True)
class WindowScreening:
    weights: np.ndarray
    coefficients: np.ndarray
    iterations: int
    center: float = 0.0
    saturated: bool = False
    degenerate: bool = False

    @property
    def retained(self) -> int:
        return int(self.weights.sum())


@dataclass(frozen=True)
class IntervalSlopeCurve:
    """|interval slope| in A/sample on the index range ``first_valid..last_valid``."""

    values: np.ndarray
    first_valid: int
    stride: int = 1
    excluded: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def last_valid(self) -> int:
        return self.first_valid + self.values.size - 1

    def segment(self, a: int, b: int) -> np.ndarray:
        """Values for absolute indices ``a..b`` inclusive."""
        if a > b or a < self.first_valid or b > self.last_valid:
            raise ValueError(f"range [{a}, {b}] outside curve domain [{self.first_valid}, {self.last_valid}]")
        return self.values[a - self.first_valid:b - self.first_valid + 1]

    def at(self, n: int) -> float:
        return float(self.segment(n, n)[0])

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("n", "abs_is"))
            for n, v in enumerate(self.values, start=self.first_valid):
                writer.writerow((n, f"{v:.12g}"))


def llsf_slope(n, values, weights=None) -> float:
    """Ordinary least-squares line slope over the points with weight 1."""
    n = np.asarray(n, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = np.ones(n.size, bool) if weights is None else np.asarray(weights) != 0
    n, values = n[keep], values[keep]
    k = n.size
    if k < 2:
        raise ValueError(f"need at least 2 retained points, got {k}")
    if np.unique(n).size != k:
        raise ValueError("indices must be distinct")
    # shifting the abscissa leaves the slope unchanged and keeps the sums small
    n = n - n.mean()
    den = k * np.dot(n, n) - n.sum() ** 2
    assert den > 0
    return float((k * np.dot(n, values) - n.sum() * values.sum()) / den)


def _batched_slope(t: np.ndarray, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    k = w.sum(axis=1)
    sn = w @ t
    si = (w * x).sum(axis=1)
    snn = w @ (t * t)
    sni = (w * x) @ t
    return (k * sni - sn * si) / (k * snn - sn * sn)


def _wls(t: np.ndarray, x: np.ndarray, w: np.ndarray, order: np.ndarray):
    """Weighted polynomial fits, one per row, with per-row order.

    Rows whose normal matrix is ill-conditioned fall back to a lower order.
    Returns coefficients (zero-padded to the max order), fitted values and
    the order actually used.
    """
    m_max = int(order.max())
    vander = np.vander(t, m_max + 1, increasing=True)
    coef = np.zeros((x.shape[0], m_max + 1))
    used = order.copy()
    todo = np.ones(x.shape[0], bool)
    for m in range(m_max, -1, -1):
        rows = np.flatnonzero(todo & (used == m))
        if rows.size == 0:
            continue
        v = vander[:, :m + 1]
        wr = w[rows]
        a = np.einsum("rl,li,lj->rij", wr, v, v)
        b = np.einsum("rl,li->ri", wr * x[rows], v)
        ok = np.linalg.cond(a) < COND_LIMIT if m > 0 else a[:, 0, 0] > 0
        good = rows[ok]
        if good.size:
            coef[good, :m + 1] = np.linalg.solve(a[ok], b[ok][..., None])[..., 0]
            todo[good] = False
        bad = rows[~ok]
        if m > 0:
            used[bad] = m - 1
    fitted = coef @ vander.T
    return coef, fitted, used


def _grubbs_statistic(r, wr, wf, count, statistic):
    """Per-point statistic and the squared-residual spread used for the floor."""
    eps = wf * r * r
    mean = eps.sum(axis=1) / count
    std_eps = np.sqrt((wf * (eps - mean[:, None]) ** 2).sum(axis=1) / count)
    with np.errstate(divide="ignore", invalid="ignore"):
        if statistic == "squared":
            g = (eps - mean[:, None]) / std_eps[:, None]
        else:
            rm = (wf * r).sum(axis=1) / count
            sd = np.sqrt((wf * (r - rm[:, None]) ** 2).sum(axis=1) / (count - 1))
            g = np.where(wr, np.abs(r - rm[:, None]) / sd[:, None], -np.inf)
            # classical test: only the most extreme point is a candidate
            g = np.where(g == g.max(axis=1, keepdims=True), g, -np.inf)
    return g, std_eps


def screen_windows(t, x, cfg: SlopeConfig, table: GrubbsTable = DEFAULT_TABLE):
    """Grubbs-screened polynomial fits of many windows sharing abscissa ``t``.

    Parameters
    ----------
    t : ndarray, shape (l,)
        Abscissa, ideally centred on zero.
    x : ndarray, shape (W, l)
        One window per row.

    Returns
    -------
    weights : bool ndarray (W, l)
    coef : ndarray (W, m+1)
    iterations, saturated, degenerate : ndarrays (W,)
    """
    t = np.asarray(t, float)
    x = np.atleast_2d(np.asarray(x, float))
    n_win, l = x.shape
    w = np.ones((n_win, l), bool)
    order = np.full(n_win, cfg.poly_order)
    iterations = np.zeros(n_win, int)
    saturated = np.zeros(n_win, bool)
    active = np.ones(n_win, bool)
    thr = np.asarray(table.thresholds(cfg.grubbs_confidence, l))
    n_floor = cfg.min_retained
    floor = np.maximum(cfg.residual_floor, cfg.relative_floor * x.var(axis=1))

    for _ in range(l):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        iterations[rows] += 1
        wr = w[rows]
        wf = wr.astype(float)
        _, fitted, used = _wls(t, x[rows], wf, order[rows])
        order[rows] = used
        count = wf.sum(axis=1)
        g, std_eps = _grubbs_statistic(x[rows] - fitted, wr, wf, count, cfg.grubbs_statistic)
        limit = thr[count.astype(int)] if cfg.grubbs_n == "retained" else np.full(rows.size, thr[l])
        live = (std_eps >= floor[rows]) & np.isfinite(limit)
        flag = wr & live[:, None] & (g >= limit[:, None])
        n_flag = flag.sum(axis=1)
        budget = count.astype(int) - n_floor
        over = n_flag > budget
        if over.any():
            # keep only the largest statistics that fit in the budget
            for r in np.flatnonzero(over):
                keep = max(budget[r], 0)
                cand = np.flatnonzero(flag[r])
                top = cand[np.argsort(-g[r, cand], kind="stable")[:keep]]
                flag[r] = False
                flag[r, top] = True
            saturated[rows[over]] = True
        w[rows] = wr & ~flag
        active[rows] = (n_flag > 0) & ~over
    coef, _, used = _wls(t, x, w.astype(float), order)
    degenerate = used < cfg.poly_order
    # an order-0 fallback carries no information about outliers
    w[used == 0] = True
    return w, coef, iterations, saturated, degenerate


def grubbs_rlrs(window, cfg: SlopeConfig, table: GrubbsTable = DEFAULT_TABLE) -> WindowScreening:
    """Screen one window given as ``(indices, values)``."""
    n, values = (np.asarray(a, float) for a in window)
    if cfg.window_len is None:
        cfg = replace(cfg, window_len=n.size)
    cfg.validate()
    if n.size != cfg.window_len or values.size != n.size:
        raise ValueError(f"window has {n.size} samples, expected {cfg.window_len}")
    center = float(n.mean())
    w, coef, it, sat, deg = screen_windows(n - center, values[None, :], cfg, table)
    return WindowScreening(w[0], coef[0], int(it[0]), center, bool(sat[0]), bool(deg[0]))


def slopes_of_windows(t, x, cfg: SlopeConfig, table: GrubbsTable = DEFAULT_TABLE):
    """Screened signed slopes for a stack of windows, plus excluded counts."""
    w, coef, *_ = screen_windows(t, x, cfg, table)
    wf = w.astype(float)
    if cfg.outlier_handling == "impute":
        fitted = coef @ np.vander(t, coef.shape[1], increasing=True).T
        x = np.where(w, x, fitted)
        wf = np.ones_like(wf)
    return _batched_slope(t, x, wf), (~w).sum(axis=1)


def robust_smooth(w: Waveform, cfg: SlopeConfig, table: GrubbsTable = DEFAULT_TABLE):
    """Replace every sample by its own window's screened polynomial fit.

    Returns the smoothed values on ``first..last`` together with ``first``
    and the per-sample count of excluded window points.
    """
    l, half = cfg.window_len, cfg.window_len // 2
    a, b = w.valid_range
    first, last = a + half - 1, b - half
    idx = np.arange(first, last + 1)
    windows = sliding_window_view(w.samples, l)[idx - half + 1]
    t = np.arange(l) - (l - 1) / 2
    weights, coef, *_ = screen_windows(t, windows, cfg, table)
    # the evaluation point sits half a sample left of the window centre
    at = np.vander(np.array([half - 1 - (l - 1) / 2]), coef.shape[1], increasing=True)[0]
    return coef @ at, first, (~weights).sum(axis=1)


def interval_slope_curve(w: Waveform, cfg: SlopeConfig = SlopeConfig(),
                         table: GrubbsTable = DEFAULT_TABLE) -> IntervalSlopeCurve:
    """|interval slope| at every valid sample of a (filtered) record.

    With ``outlier_handling="smooth"`` the record is first robustly
    smoothed and the plain least-squares slope of the smoothed samples is
    taken; otherwise each slope window is screened on its own.
    """
    cfg = cfg.resolve(w.cycle_len)
    l, half = cfg.window_len, cfg.window_len // 2
    a, b = w.valid_range
    need = 3 * l if cfg.outlier_handling == "smooth" else 2 * l
    if b - a + 1 < need:
        raise ValueError(f"need at least {need} valid samples, got {b - a + 1}")
    t = np.arange(l) - (l - 1) / 2

    if cfg.outlier_handling == "smooth":
        smooth, s_first, excluded = robust_smooth(w, cfg, table)
        first, last = s_first + half - 1, s_first + smooth.size - 1 - half
        eval_idx = _eval_points(first, last, cfg.stride)
        slopes = sliding_window_view(smooth, l)[eval_idx - half + 1 - s_first] @ t / (t @ t)
        excluded = excluded[eval_idx - s_first]
    else:
        first, last = a + half - 1, b - half
        eval_idx = _eval_points(first, last, cfg.stride)
        windows = sliding_window_view(w.samples, l)[eval_idx - half + 1]
        slopes, excluded = slopes_of_windows(t, windows, cfg, table)

    if cfg.stride > 1:
        # interpolate the signed slope: |slope| has a kink at every zero
        slopes = np.interp(np.arange(first, last + 1), eval_idx, slopes)
    values = np.abs(slopes)
    values.setflags(write=False)
    return IntervalSlopeCurve(values, first, cfg.stride, excluded)


def _eval_points(first: int, last: int, stride: int) -> np.ndarray:
    idx = np.arange(first, last + 1, stride)
    if idx[-1] != last:
        idx = np.append(idx, last)
    return idx
