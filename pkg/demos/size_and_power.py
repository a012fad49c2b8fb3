"""Small Monte Carlo study of empirical size and power.

Uses the built-in presets with a reduced replication count so the script
finishes in well under a minute.  Pass a larger REPS for tighter intervals.
"""

import sys

from hdcovtest.montecarlo import run_scenario, scenario_presets, size_power_table

REPS = int(sys.argv[1]) if len(sys.argv) > 1 else 300
presets = scenario_presets(replications=REPS, master_seed=2024)

names = [
    f"grid-{kind}-{law}-p{p}-n{n}"
    for kind in ("size", "power")
    for law in ("normal", "exp", "uniform")
    for p in (20, 100)
    for n in (10, 50)
]
results = []
for name in names:
    s = presets[name]
    est = run_scenario(s)
    lo, hi = est.wilson_ci_95
    print(f"{name:<32} rate {est.rate:.3f}  95% CI [{lo:.3f}, {hi:.3f}]")
    results.append((s, est))

print()
print(size_power_table(results).render())
