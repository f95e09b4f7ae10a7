"""High-impedance fault detection from the interval-slope "double M" signature."""

from .detector import DetectorConfig, analyze_half_cycle, detect, judge, prepare
from .grubbs import DEFAULT_TABLE, GrubbsTable
from .preprocess import FilterSpec, calibrate_extremum, locate_cycle_extrema, lowpass_filter
from .report import DetectionReport, read_report_json, write_report_json
from .slope import IntervalSlopeCurve, SlopeConfig, grubbs_rlrs, interval_slope_curve, llsf_slope
from .synth import HifParams, HifTypePreset, add_noise, gen_hif, gen_nonfault
from .waveform import CycleWindow, Waveform, load_waveform_csv, write_waveform_csv

__all__ = [
    "CycleWindow", "DEFAULT_TABLE", "DetectionReport", "DetectorConfig", "FilterSpec", "GrubbsTable",
    "HifParams", "HifTypePreset", "IntervalSlopeCurve", "SlopeConfig", "Waveform", "add_noise",
    "analyze_half_cycle", "calibrate_extremum", "detect", "gen_hif", "gen_nonfault", "grubbs_rlrs",
    "interval_slope_curve", "judge", "llsf_slope", "load_waveform_csv", "locate_cycle_extrema",
    "lowpass_filter", "prepare", "read_report_json", "write_report_json", "write_waveform_csv",
]
