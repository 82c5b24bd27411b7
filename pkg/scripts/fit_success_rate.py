"""How often a noisy three-setting fit lands within 5% on sigma and delta, by scan step.

    python scripts/fit_success_rate.py --seeds 200
"""
import argparse

import numpy as np

from qiforce.apparatus import REFERENCE_PARAMS, REFERENCE_THETA1, REFERENCE_THETA2, CoincidenceModelParams, scan_positions, simulate_scan
from qiforce.fitting import Dataset, FitInput, fit
from qiforce.numerics import RngStream


def success_rate(step, seeds, weighting):
    x = scan_positions(-0.6, 0.6, step)
    hits = 0
    for seed in range(seeds):
        data = FitInput(
            [
                Dataset(REFERENCE_THETA1, t2, simulate_scan(x, REFERENCE_THETA1, t2, REFERENCE_PARAMS, noise=RngStream(seed, k)))
                for k, t2 in enumerate(REFERENCE_THETA2)
            ]
        )
        p = fit(data, CoincidenceModelParams(300.0, 4.0, 2.0), weighting=weighting).params
        hits += abs(p.sigma / REFERENCE_PARAMS.sigma - 1) <= 0.05 and abs(p.delta / REFERENCE_PARAMS.delta - 1) <= 0.05
    return len(x), hits / seeds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--weighting", choices=["none", "poisson"], default="none")
    args = ap.parse_args()
    print(f"{'step mm':>8} {'points':>7} {'success':>8}")
    for step in (0.03, 0.02, 0.015, 0.01):
        n, rate = success_rate(step, args.seeds, args.weighting)
        print(f"{step:8.3f} {n:7d} {rate:8.3f}")


if __name__ == "__main__":
    main()
