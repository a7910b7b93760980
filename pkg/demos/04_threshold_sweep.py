"""
Tuning thresholds for counting
==============================

Thresholds are picked by minimizing counting MAE over a grid. Ties go to
the most conservative setting: the smallest gap, then the longest minimum
duration, then the smallest center radius. Here the three presets serve
as a small validation set.
"""

from trackcount.cli import sweep
from trackcount.simulate import PRESETS, preset_scenario, simulate

pairs = [simulate(preset_scenario(name)) for name in sorted(PRESETS)]
rows = sweep(pairs, [5, 10, 15, 20, 25], [0, 5, 10, 15, 20, 25, 30], [0.05, 0.10, 0.15, 0.20])

print(f"{'rank':>4} {'min_dur':>7} {'max_gap':>7} {'dist':>5} {'MAE':>6}")
for r in rows[:10]:
    print(f"{r['rank']:>4} {r['min_duration']:>7} {r['max_gap']:>7} {r['max_center_dist']:>5.2f} {r['mae']:>6.3f}")
print("...")
print(f"worst: {rows[-1]['mae']:.3f} at {rows[-1]['min_duration']}/{rows[-1]['max_gap']}/{rows[-1]['max_center_dist']}")
