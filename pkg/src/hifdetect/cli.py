"""Command-line front end.

Sub-commands::

    hifdetect detect RECORD.csv --out report.json
    hifdetect gen --type C2 --count 20 --snr 25 --seed 100 --out corpus/
    hifdetect sweep-snr --corpus corpus/ --snr 40,30,20,16,10,5,3 --repeats 20 --out snr.csv
    hifdetect sweep-kset1 --corpus corpus/ --k 0.70:0.95:0.01 --out kset1.csv

Exit codes: 0 success (``detect``: no trip), 2 trip detected, 1 error.
CSV outputs get a ``<name>.manifest.json`` sidecar with the run manifest.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .detector import DetectorConfig, config_echo, judge, prepare
from .preprocess import FilterSpec
from .report import write_json_atomic, write_report_json
from .slope import SlopeConfig
from .synth import LABELS, NONFAULT_KINDS, HifParams, add_noise, gen_hif, gen_nonfault, get_preset, synthesize
from .waveform import Waveform, load_waveform_csv, write_waveform_csv

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    """Everything needed to repeat a run."""

    command: str
    inputs: list[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    package_version: str = ""

    def __post_init__(self):
        if not self.package_version:
            try:
                self.package_version = version("artifact")
            except PackageNotFoundError:
                self.package_version = "unknown"

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------- config

def _add_common(p: argparse.ArgumentParser) -> None:
    d = DetectorConfig()
    s = SlopeConfig()
    f = FilterSpec()
    g = p.add_argument_group("signal and detector settings")
    g.add_argument("--fs", type=float, default=6400.0, help="sample rate in Hz (default 6400; published)")
    g.add_argument("--f0", type=float, default=50.0, help="fundamental in Hz (default 50; published)")
    g.add_argument("--cutoff", type=float, default=f.cutoff_hz,
                   help=f"low-pass cutoff in Hz (default {f.cutoff_hz:g}; published)")
    g.add_argument("--kset1", type=float, default=d.k_set1, help=f"depth threshold K_set1 (default {d.k_set1}; published)")
    g.add_argument("--kset2", type=float, default=d.k_set2,
                   help=f"extra-minimum tolerance K_set2 (default {d.k_set2}; published)")
    g.add_argument("--d", type=int, default=None, help="extremum exclusion zone in samples (default N_T/16; decision)")
    g.add_argument("--confirm", type=int, default=d.confirm_cycles,
                   help=f"consecutive faulty cycles to trip (default {d.confirm_cycles}; published range 4-6)")
    g.add_argument("--stride", type=int, default=s.stride,
                   help=f"slope evaluation stride in samples (default {s.stride}; decision)")
    g.add_argument("--grubbs-p", type=float, default=s.grubbs_confidence,
                   help=f"Grubbs confidence (default {s.grubbs_confidence}; published)")
    g.add_argument("--poly-order", type=int, default=s.poly_order,
                   help=f"local fit polynomial order (default {s.poly_order}; decision)")
    g.add_argument("--outlier-handling", choices=("smooth", "exclude", "impute"), default=s.outlier_handling,
                   help=f"how screened samples enter the slope (default {s.outlier_handling}; decision)")
    g.add_argument("--seed", type=int, default=0, help="base seed (default 0)")


def configs_from_args(args) -> tuple[SlopeConfig, DetectorConfig, FilterSpec]:
    slope_cfg = SlopeConfig(stride=args.stride, grubbs_confidence=args.grubbs_p, poly_order=args.poly_order,
                            outlier_handling=args.outlier_handling)
    det_cfg = DetectorConfig(k_set1=args.kset1, k_set2=args.kset2, d=args.d, confirm_cycles=args.confirm)
    filt = FilterSpec(cutoff_hz=args.cutoff)
    filt.validate(args.fs, args.f0)
    return slope_cfg, det_cfg, filt


def _resolved_echo(args, n_t: int) -> dict:
    slope_cfg, det_cfg, filt = configs_from_args(args)
    return config_echo(slope_cfg.resolve(n_t), det_cfg.resolve(n_t), filt)


def _cycle_len(args) -> int:
    return Waveform(np.zeros(1), args.fs, args.f0).cycle_len


# ---------------------------------------------------------------- corpus

def read_corpus(corpus_dir) -> dict:
    path = Path(corpus_dir) / MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(f"no corpus manifest at {path}")
    with path.open() as fh:
        return json.load(fh)


def record_params(entry: dict) -> HifParams:
    return HifParams(**entry["params"])


def clean_record(entry: dict, fs: float, f0: float) -> Waveform:
    """Noise-free version of a corpus record, rebuilt from its manifest entry."""
    if entry["label"] == "NONFAULT":
        p = entry["params"]
        return gen_nonfault(p["kind"], p["cycles"], fs, f0, math.inf, p["seed"])
    params = replace(record_params(entry), snr_db=math.inf)
    return synthesize(params, entry["cycles"], fs, f0)


def is_detected(trip: int | None, onset: int) -> bool:
    return trip is not None and trip >= onset


# ---------------------------------------------------------------- commands

def cmd_detect(args) -> int:
    slope_cfg, det_cfg, filt = configs_from_args(args)
    w = load_waveform_csv(args.input, args.fs, args.f0)
    det_cfg = det_cfg.resolve(w.cycle_len)
    slope_cfg = slope_cfg.resolve(w.cycle_len)
    filtered, curve = prepare(w, slope_cfg, filt, confirm_cycles=det_cfg.confirm_cycles)
    report = judge(filtered, curve, det_cfg, config_echo(slope_cfg, det_cfg, filt))
    out = Path(args.out) if args.out else Path(args.input).with_suffix(".report.json")
    outputs = [str(out)]
    if args.curve_csv:
        curve.to_csv(args.curve_csv)
        outputs.append(str(args.curve_csv))
    report.manifest = RunManifest("detect", [str(args.input)], report.config, outputs, [args.seed]).to_dict()
    write_report_json(report, out)
    n_faulty = len(report.faulty_cycles)
    trip = "none" if report.trip_cycle is None else report.trip_cycle
    print(f"{args.input}: {len(report.cycles)} cycles, {n_faulty} faulty, trip_cycle={trip}")
    return 0 if report.trip_cycle is None else 2


def cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    labels = [t.strip() for t in args.type.split(",") if t.strip()]
    for lab in labels:
        get_preset(lab)
    if args.count < 1:
        raise ValueError("--count must be >= 1")
    manifest_path = out / MANIFEST_NAME
    corpus = read_corpus(out) if manifest_path.exists() else {"records": [], "runs": []}
    entries = {e["path"]: e for e in corpus["records"]}
    seeds = [args.seed + i for i in range(args.count)]
    written = []
    for lab in labels:
        for i, seed in enumerate(seeds):
            name = f"{lab}_{seed:06d}.csv"
            if lab == "NONFAULT":
                kind = NONFAULT_KINDS[i % len(NONFAULT_KINDS)]
                w = gen_nonfault(kind, args.cycles, args.fs, args.f0, args.snr, seed)
                params = {"kind": kind, "cycles": args.cycles, "snr_db": args.snr, "seed": seed}
                onset = None
            else:
                w, hp = gen_hif(lab, args.cycles, args.fs, args.f0, seed, args.snr, args.onset)
                params = hp.to_dict()
                onset = hp.onset_cycle
            write_waveform_csv(w, out / name)
            entries[name] = {"label": lab, "seed": seed, "path": name, "cycles": args.cycles,
                             "onset_cycle": onset, "params": params}
            written.append(name)
    run = RunManifest("gen", [], {"type": labels, "count": args.count, "snr_db": args.snr, "cycles": args.cycles,
                                  "onset_cycle": args.onset, "fs": args.fs, "f0": args.f0},
                      written, seeds)
    runs = [r for r in corpus.get("runs", []) if r["outputs"] != run.outputs] + [run.to_dict()]
    records = [entries[k] for k in sorted(entries)]
    write_json_atomic({"fs": args.fs, "f0": args.f0, "records": records, "runs": runs}, manifest_path)
    print(f"wrote {len(written)} records to {out}")
    return 0


def _parse_floats(text: str) -> list[float]:
    """``"a,b,c"`` or ``"start:stop:step"`` (stop inclusive)."""
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(n)]
    return [float(v) for v in text.split(",") if v.strip()]


def _write_rows(path, header, rows, manifest: RunManifest) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(buf.getvalue())
    tmp.replace(path)
    write_json_atomic(manifest.to_dict(), path.with_name(path.name + ".manifest.json"))


def _fault_entries(corpus: dict) -> list[dict]:
    return sorted((e for e in corpus["records"] if e["label"] != "NONFAULT"), key=lambda e: e["path"])


def sweep_snr(corpus: dict, snrs: list[float], repeats: int, args) -> list[tuple]:
    """Rows ``(snr_db, type, detected, total, rate)``; type ``ALL`` pools every label."""
    slope_cfg, det_cfg, filt = configs_from_args(args)
    entries = _fault_entries(corpus)
    if not entries:
        raise ValueError("corpus has no fault records")
    rows = []
    for snr in sorted(snrs):
        hits: dict[str, list[int]] = {}
        for e in entries:
            clean = clean_record(e, args.fs, args.f0)
            for rep in range(repeats):
                # per-record, per-repeat noise; independent of the sweep grid
                seed = [args.seed, e["seed"], rep, int(round(snr * 1000)) % 2**32]
                w = add_noise(clean, snr, seed)
                filtered, curve = prepare(w, slope_cfg, filt, confirm_cycles=det_cfg.confirm_cycles)
                report = judge(filtered, curve, det_cfg)
                hits.setdefault(e["label"], []).append(is_detected(report.trip_cycle, e["onset_cycle"]))
        for lab in sorted(hits):
            h = hits[lab]
            rows.append((snr, lab, sum(h), len(h), sum(h) / len(h)))
        pooled = [x for h in hits.values() for x in h]
        rows.append((snr, "ALL", sum(pooled), len(pooled), sum(pooled) / len(pooled)))
    return rows


def cmd_sweep_snr(args) -> int:
    corpus = read_corpus(args.corpus)
    snrs = _parse_floats(args.snr)
    rows = sweep_snr(corpus, snrs, args.repeats, args)
    manifest = RunManifest("sweep-snr", [str(Path(args.corpus) / MANIFEST_NAME)],
                           {**_resolved_echo(args, _cycle_len(args)), "snr_db": snrs, "repeats": args.repeats},
                           [str(args.out)], [e["seed"] for e in _fault_entries(corpus)])
    _write_rows(args.out, ("snr_db", "type", "detected", "total", "rate"),
                [(f"{s:g}", t, d, n, f"{r:.6g}") for s, t, d, n, r in rows], manifest)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def sweep_kset1(corpus: dict, ks: list[float], args) -> list[tuple]:
    """Rows ``(k_set1, detected_rate, misjudged_cycle_rate)``.

    Misjudged cycles are faulty verdicts on non-fault records and on the
    cycles of fault records that precede the onset.
    """
    slope_cfg, det_cfg, filt = configs_from_args(args)
    prepared = []
    for e in sorted(corpus["records"], key=lambda e: e["path"]):
        w = load_waveform_csv(Path(args.corpus) / e["path"], args.fs, args.f0)
        prepared.append((e, *prepare(w, slope_cfg, filt, confirm_cycles=det_cfg.confirm_cycles)))
    if not any(e["label"] != "NONFAULT" for e, *_ in prepared):
        raise ValueError("corpus has no fault records")
    rows = []
    for k in sorted(ks):
        cfg = replace(det_cfg, k_set1=k)
        detected = total = wrong = clean_cycles = 0
        for e, filtered, curve in prepared:
            report = judge(filtered, curve, cfg)
            onset = e["onset_cycle"]
            if onset is None:
                pre = report.cycles
            else:
                total += 1
                detected += is_detected(report.trip_cycle, onset)
                pre = [c for c in report.cycles if c.index < onset]
            clean_cycles += len(pre)
            wrong += sum(c.faulty for c in pre)
        rows.append((k, detected / total, wrong / clean_cycles if clean_cycles else 0.0))
    return rows


def cmd_sweep_kset1(args) -> int:
    corpus = read_corpus(args.corpus)
    ks = _parse_floats(args.k)
    rows = sweep_kset1(corpus, ks, args)
    manifest = RunManifest("sweep-kset1", [str(Path(args.corpus) / MANIFEST_NAME)],
                           {**_resolved_echo(args, _cycle_len(args)), "k_set1": ks},
                           [str(args.out)], [e["seed"] for e in corpus["records"]])
    _write_rows(args.out, ("k_set1", "detected_rate", "misjudged_cycle_rate"),
                [(f"{k:g}", f"{d:.6g}", f"{m:.6g}") for k, d, m in rows], manifest)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# ---------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hifdetect", description="High-impedance fault detection on "
                                     "zero-sequence current records using the interval-slope double-M signature.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the detector on one CSV record")
    p.add_argument("input", help="CSV with columns time_s,i0_a or a single i0_a column")
    p.add_argument("--out", help="report JSON path (default: <input>.report.json)")
    p.add_argument("--curve-csv", help="also write the interval-slope curve as n,abs_is")
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--type", required=True, help=f"label or comma list from {', '.join(LABELS)}")
    p.add_argument("--count", type=int, default=20, help="records per label (default 20)")
    p.add_argument("--snr", type=float, default=25.0, help="SNR in dB, inf for no noise (default 25)")
    p.add_argument("--cycles", type=int, default=40, help="cycles per record (default 40)")
    p.add_argument("--onset", type=int, default=10, help="fault onset cycle (default 10)")
    p.add_argument("--out", required=True, help="output directory; the manifest is merged")
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep-snr", help="detection rate against SNR")
    p.add_argument("--corpus", required=True, help="directory written by gen")
    p.add_argument("--snr", default="40,30,25,20,16,10,5,3,0", help="list a,b,c or start:stop:step")
    p.add_argument("--repeats", type=int, default=20, help="noise draws per record and level (default 20)")
    p.add_argument("--out", required=True, help="output CSV")
    _add_common(p)
    p.set_defaults(func=cmd_sweep_snr)

    p = sub.add_parser("sweep-kset1", help="detection and misjudgment rates against K_set1")
    p.add_argument("--corpus", required=True, help="directory written by gen (fault and NONFAULT records)")
    p.add_argument("--k", default="0.70:0.95:0.01", help="list a,b,c or start:stop:step")
    p.add_argument("--out", required=True, help="output CSV")
    _add_common(p)
    p.set_defaults(func=cmd_sweep_kset1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
