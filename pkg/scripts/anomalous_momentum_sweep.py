"""Mean photon-1 momentum against the photon-2 analyzer angle.

The grating always pushes by +delta, yet for a band of theta2 the post-selected
mean is negative. The port-averaged mean is printed alongside; it never leaves
[0, delta].
"""
import argparse

import numpy as np

from qiforce.apparatus import CoincidenceModelParams, model_mean_momentum
from qiforce.biphoton import PolarizationAnalyzer, condition_on_photon2, post_grating_state, port_pair_mean_momentum
from qiforce.wavefunction import DegenerateStateError


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--theta1", type=float, default=62.0)
    ap.add_argument("--sigma", type=float, default=4.79)
    ap.add_argument("--delta", type=float, default=2.88)
    ap.add_argument("--visibility", type=float, default=1.0)
    ap.add_argument("--step", type=float, default=5.0, help="theta2 step in degrees")
    args = ap.parse_args()

    params = CoincidenceModelParams(1.0, args.sigma, args.delta, args.visibility)
    state = post_grating_state(args.sigma, args.delta)
    a1 = PolarizationAnalyzer(args.theta1)
    print(f"{'theta2':>7} {'<p> post-selected':>18} {'<p> both ports':>15}")
    for t2 in np.arange(0.0, 90.0 + 1e-9, args.step):
        try:
            m = f"{model_mean_momentum(args.theta1, t2, params):+18.4f}"
        except DegenerateStateError:
            m = f"{'(no counts)':>18}"
        both = port_pair_mean_momentum(condition_on_photon2(state, PolarizationAnalyzer(t2)), a1)
        print(f"{t2:7.1f} {m} {both:+15.4f}")


if __name__ == "__main__":
    main()
