"""Detection report types and their JSON form.

Schema (stable field names)::

    {
      "cycles": [
        {"index": 12, "faulty": true, "fundamental_a": 4.98,
         "halves": [<verdict>, <verdict>]},
        ...
      ],
      "trip_cycle": 14,          # or null
      "config": {...},           # echo of every tunable
      "manifest": {...}          # optional, written by the CLI
    }

A verdict carries ``n_a``, ``n_b``, ``passed``, ``reason`` and the
diagnostic indices and values used by the criteria.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class HalfCycleVerdict:
    n_a: int
    n_b: int
    passed: bool
    reason: str | None = None
    n_min0: int | None = None
    n_max1: int | None = None
    n_max2: int | None = None
    is_min0: float | None = None
    is_max1: float | None = None
    is_max2: float | None = None
    num_c1: int | None = None
    num_c2: int | None = None
    # (index, depth ratio) for every interior minimum besides the first
    extra_minima: list[tuple[int, float]] = field(default_factory=list)


@dataclass
class CycleRecord:
    index: int
    faulty: bool
    fundamental_a: float
    halves: tuple[HalfCycleVerdict, HalfCycleVerdict] | None = None
    note: str | None = None


@dataclass
class DetectionReport:
    cycles: list[CycleRecord] = field(default_factory=list)
    trip_cycle: int | None = None
    config: dict = field(default_factory=dict)
    manifest: dict | None = None

    @property
    def faulty_cycles(self) -> list[int]:
        return [c.index for c in self.cycles if c.faulty]

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["manifest"] is None:
            del d["manifest"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DetectionReport":
        cycles = []
        for c in d["cycles"]:
            halves = c.get("halves")
            if halves is not None:
                halves = tuple(_verdict(h) for h in halves)
            cycles.append(CycleRecord(c["index"], c["faulty"], c["fundamental_a"], halves, c.get("note")))
        return cls(cycles, d["trip_cycle"], d.get("config", {}), d.get("manifest"))


def _verdict(h: dict) -> HalfCycleVerdict:
    h = dict(h)
    h["extra_minima"] = [tuple(e) for e in h.get("extra_minima", [])]
    return HalfCycleVerdict(**h)


def write_json_atomic(obj, path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=False)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report_json(report: DetectionReport, path) -> None:
    write_json_atomic(report.to_dict(), path)


def read_report_json(path) -> DetectionReport:
    with Path(path).open() as fh:
        return DetectionReport.from_dict(json.load(fh))
