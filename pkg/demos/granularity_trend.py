"""
Wavelengths and ADMs versus granularity
=======================================

A small version of the n=15 binary-tree sweep: one traffic instance, four
granularities, every splitting mode. Larger granularity lets more traffic
share a wavelength, so both counts fall toward their lower bounds.

Set RUNS and the GA sizes higher for smoother numbers.
"""

from treegroom.experiment import CellGroup, ExperimentConfig, plot_series, run_sweep

RUNS = 2
cfg = ExperimentConfig(groups=(CellGroup("complete_binary", (15,), (2,), (16, 24, 48, 96)),),
                       runs_per_cell=RUNS, mu=30, lambda_offspring=30, generations=40)
rows, summary = run_sweep(cfg)

###############################################################################
# Best of the runs per (mode, g), with the bounds alongside.

for metric in ("adms", "wavelengths"):
    series = plot_series(summary, "g", metric)
    print(f"\n{metric}")
    print("g     " + "".join(f"{k:>13}" for k in series))
    for g in (16, 24, 48, 96):
        print(f"{g:<6}" + "".join(f"{str(series[k].get(g)):>13}" for k in series))
