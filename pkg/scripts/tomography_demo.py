"""Purity of reconstructed Werner states across count levels and seeds."""
import argparse
import math

import numpy as np

from qiforce.numerics import RngStream
from qiforce.tomography import (
    MINIMAL_SETTINGS,
    PAULI_SETTINGS,
    max_fidelity_to_bell,
    purity,
    reconstruct,
    settings_from_labels,
    simulate_counts,
    werner_state,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--v", type=float, default=math.sqrt(0.88), help="Werner weight")
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--minimal", action="store_true", help="use the 16-setting set")
    args = ap.parse_args()

    truth = werner_state(args.v)
    labels = MINIMAL_SETTINGS if args.minimal else PAULI_SETTINGS
    settings = settings_from_labels(labels)
    print(f"true purity {purity(truth):.4f}, {len(labels)} settings")
    print(f"{'counts':>9} {'mean purity':>12} {'std':>8} {'|dP|<=0.02':>11} {'mean F':>8}")
    for n in (1e2, 1e3, 1e4, 1e5, 1e6):
        pur, fid = [], []
        for seed in range(args.seeds):
            rho = reconstruct(simulate_counts(truth, n, settings, RngStream(seed, 1000)))
            pur.append(purity(rho))
            fid.append(max_fidelity_to_bell(rho)[0])
        pur = np.array(pur)
        ok = np.mean(np.abs(pur - purity(truth)) <= 0.02)
        print(f"{n:9.0e} {pur.mean():12.4f} {pur.std():8.4f} {ok:11.2f} {np.mean(fid):8.4f}")


if __name__ == "__main__":
    main()
