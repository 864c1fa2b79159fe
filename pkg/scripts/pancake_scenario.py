"""Depletion constant at SNR 1 for a pancake condensate with a_x a_y = 1e4 lambda^2.

Prints kappa, the survival probability and the rounded 1e10 / N^2 estimate
for a range of atom numbers.

    python scripts/pancake_scenario.py [--snr 1] [--width 100]
"""

import argparse
import math

from bec_backaction.condensate import GaussianProfile, effective_eta
from bec_backaction.imaging import kappa, rounded_kappa_estimate, plan_for_snr
from bec_backaction.params import reduced_params


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr", type=float, default=1.0)
    ap.add_argument("--width", type=float, default=100.0, help="transverse Gaussian width in wavelengths")
    args = ap.parse_args()

    params = reduced_params()
    eta = effective_eta(GaussianProfile((args.width, args.width, args.width / 2)))
    print(f"{'N':>10} {'kappa':>12} {'1e10/N^2':>12} {'log10 survival':>16}")
    for exponent in range(3, 8):
        N = 10.0**exponent
        rep = kappa(params, N, eta, plan_for_snr(params, N, eta, args.snr).duration)
        print(f"{N:>10.0e} {rep.kappa:>12.4e} {rounded_kappa_estimate(N):>12.4e} {-rep.kappa / math.log(10):>16.4g}")


if __name__ == "__main__":
    main()
