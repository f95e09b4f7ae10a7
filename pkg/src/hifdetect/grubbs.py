"""Grubbs outlier thresholds G(p, N)."""

from __future__ import annotations

import math
from functools import lru_cache

from scipy import stats

CONFIDENCES = (0.90, 0.95, 0.975, 0.99, 0.995)

# N -> thresholds for the confidence levels above, N = 5..16
_TABLE = {
    5: (1.602, 1.672, 1.715, 1.749, 1.764),
    6: (1.729, 1.822, 1.887, 1.944, 1.973),
    7: (1.828, 1.938, 2.020, 2.097, 2.139),
    8: (1.909, 2.032, 2.126, 2.22, 2.274),
    9: (1.977, 2.110, 2.215, 2.323, 2.387),
    10: (2.036, 2.176, 2.290, 2.410, 2.482),
    11: (2.088, 2.234, 2.355, 2.485, 2.564),
    12: (2.134, 2.285, 2.412, 2.550, 2.636),
    13: (2.175, 2.331, 2.462, 2.607, 2.699),
    14: (2.213, 2.371, 2.507, 2.659, 2.755),
    15: (2.247, 2.409, 2.549, 2.705, 2.806),
    16: (2.279, 2.443, 2.585, 2.747, 2.852),
}

MIN_N = min(_TABLE)
MAX_TABULATED_N = max(_TABLE)


def _column(p: float) -> int:
    for i, c in enumerate(CONFIDENCES):
        if math.isclose(p, c, abs_tol=1e-9):
            return i
    raise ValueError(f"confidence {p} not one of {CONFIDENCES}")


@lru_cache(maxsize=None)
def _extended(p: float, n: int) -> float:
    # one-sided critical value from the t distribution
    alpha = 1.0 - p
    t = stats.t.isf(alpha / n, n - 2)
    return (n - 1) / math.sqrt(n) * math.sqrt(t * t / (n - 2 + t * t))


class GrubbsTable:
    """Lookup of the Grubbs threshold by confidence ``p`` and sample count ``n``.

    Tabulated values cover n = 5..16. Larger n use the t-distribution
    formula, floored so the column stays strictly increasing. Below 5 there
    is no threshold (``None``): screening is skipped.
    """

    def __init__(self):
        self._table = {n: tuple(row) for n, row in _TABLE.items()}

    def __call__(self, p: float, n: int) -> float | None:
        col = _column(p)
        if n < MIN_N:
            return None
        if n <= MAX_TABULATED_N:
            return self._table[n][col]
        prev = self(p, n - 1)
        return max(_extended(CONFIDENCES[col], n), prev + 1e-6)

    def thresholds(self, p: float, n_max: int) -> list[float]:
        """Thresholds indexed by n for n in 0..n_max, ``inf`` where undefined."""
        return [math.inf if n < MIN_N else self(p, n) for n in range(n_max + 1)]


DEFAULT_TABLE = GrubbsTable()
