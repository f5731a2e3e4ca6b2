"""Seeded sweep comparing Bethe, z_empty-corrected and truncated-series log Z.

Uses the same runner as ``loopcalc experiment``; prints the per-cell medians.
Pass an output path to keep the CSVs.
"""

import sys
from dataclasses import replace
from pathlib import Path

from loopcalc.experiments import ExperimentConfig, run_experiment


def main(out=None):
    cfg = ExperimentConfig.load(Path(__file__).with_name("sweep.json"))
    res = run_experiment(replace(cfg, out=out))
    print(f"{'beta':>5} {'theta':>5} {'conv':>5}{'med err BP':>11} {'med err z0':>11} {'med err series':>14}")
    for s in res.summary:
        print(f"{s['beta']:5.1f} {s['theta']:5.1f} {s['n_converged']:>2}/{s['n']:<2}"
              f"{s['median_err_bp']:11.2e} {s['median_err_zempty']:11.2e} {s['median_err_series']:14.2e}")


if __name__ == "__main__":
    main(*sys.argv[1:2])
