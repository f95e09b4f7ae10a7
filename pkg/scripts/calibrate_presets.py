"""Print the naive high-frequency-energy ranges behind the preset calibration.

A threshold at the smallest Type A ratio must leave every Type B record
below it. Run: python scripts/calibrate_presets.py [n_seeds]
"""

import sys

from hifdetect.synth import hf_calibration

n = int(sys.argv[1]) if len(sys.argv) > 1 else 100
ranges = hf_calibration(seeds=range(n))
for label, (lo, hi) in ranges.items():
    print(f"{label:3s} hf_energy_ratio in [{lo:.3e}, {hi:.3e}]")
ok = ranges["B"][1] < ranges["A"][0]
print(f"naive threshold at min(A) = {ranges['A'][0]:.3e} misses all B: {ok}")
sys.exit(0 if ok else 1)
