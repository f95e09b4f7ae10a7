"""Sampled zero-sequence current records and their CSV form."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MIN_CYCLE_LEN = 32
CSV_COLUMNS = ("time_s", "i0_a")


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled current record.

    Parameters
    ----------
    samples : array_like
        Current values in amperes.
    sample_rate_hz : float
        Sampling frequency.
    fundamental_hz : float
        Power frequency, 50 Hz by default.
    warmup : int
        Number of samples at each end that are not trustworthy (filter
        transients). Zero for raw records.
    """

    samples: np.ndarray
    sample_rate_hz: float
    fundamental_hz: float = 50.0
    warmup: int = 0
    cycle_len: int = field(init=False)

    def __post_init__(self):
        x = np.array(self.samples, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite")
        if self.sample_rate_hz <= 0 or self.fundamental_hz <= 0:
            raise ValueError("sample_rate_hz and fundamental_hz must be positive")
        ratio = self.sample_rate_hz / self.fundamental_hz
        n_t = round(ratio)
        if not math.isclose(ratio, n_t, rel_tol=0, abs_tol=1e-9) or n_t < MIN_CYCLE_LEN:
            raise ValueError(
                f"samples per cycle must be an integer >= {MIN_CYCLE_LEN}, "
                f"got {self.sample_rate_hz}/{self.fundamental_hz} = {ratio:g}"
            )
        if self.warmup < 0 or 2 * self.warmup >= x.size:
            raise ValueError("warmup must leave at least one valid sample")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "cycle_len", int(n_t))

    def __len__(self):
        return self.samples.size

    @property
    def n_cycles(self) -> int:
        return self.samples.size // self.cycle_len

    @property
    def valid_range(self) -> tuple[int, int]:
        """Inclusive index range outside the warm-up margins."""
        return self.warmup, self.samples.size - 1 - self.warmup

    def with_samples(self, samples, warmup: int | None = None) -> "Waveform":
        return Waveform(
            samples,
            self.sample_rate_hz,
            self.fundamental_hz,
            self.warmup if warmup is None else warmup,
        )

    def scaled(self, c: float) -> "Waveform":
        return self.with_samples(c * self.samples)


@dataclass(frozen=True)
class CycleWindow:
    start_index: int
    length: int

    @property
    def stop(self) -> int:
        return self.start_index + self.length

    def check_inside(self, w: Waveform) -> None:
        if self.start_index < 0 or self.stop > len(w):
            raise ValueError(
                f"cycle [{self.start_index}, {self.stop}) outside record of {len(w)} samples"
            )


def _parse_float(text: str, row: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"row {row}: non-numeric value {text.strip()!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"row {row}: non-finite value {text.strip()!r}")
    return value


def load_waveform_csv(path, sample_rate_hz: float, fundamental_hz: float = 50.0) -> Waveform:
    """Read a record with columns ``time_s,i0_a`` or a single ``i0_a``.

    The header row is optional. Timestamps are ignored; the sample rate is
    always taken from the argument. Row numbers in error messages are
    1-based file lines.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")

    with path.open(newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")

    col = None
    first_no, first = rows[0]
    names = [c.strip().lower() for c in first]
    if any(n in CSV_COLUMNS for n in names):
        if "i0_a" not in names:
            raise ValueError(f"row {first_no}: header lacks required column 'i0_a'")
        col = names.index("i0_a")
        rows = rows[1:]

    samples = []
    for row_no, row in rows:
        if col is None:
            if len(row) not in (1, 2):
                raise ValueError(f"row {row_no}: expected 1 or 2 columns, got {len(row)}")
            text = row[-1]
        else:
            if col >= len(row):
                raise ValueError(f"row {row_no}: missing 'i0_a' value")
            text = row[col]
        samples.append(_parse_float(text, row_no))
    if not samples:
        raise ValueError(f"{path}: no samples")
    return Waveform(np.asarray(samples), sample_rate_hz, fundamental_hz)


def write_waveform_csv(w: Waveform, path, with_time: bool = True) -> None:
    """Write ``w`` in the ingestion schema, 12 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if with_time:
            writer.writerow(CSV_COLUMNS)
            dt = 1.0 / w.sample_rate_hz
            for n, v in enumerate(w.samples):
                writer.writerow((f"{n * dt:.12g}", f"{v:.12g}"))
        else:
            writer.writerow(("i0_a",))
            for v in w.samples:
                writer.writerow((f"{v:.12g}",))
