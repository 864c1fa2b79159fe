"""Contour-integral depletion rate against the closed form.

Sweeps the integration window c*tau0 and the regularisation eps and prints
the relative deviation next to the analytic truncation bound.

    python scripts/depletion_oracle_sweep.py
"""

import numpy as np

from bec_backaction.params import reduced_params
from bec_backaction.rates import gamma_l_closed, gamma_l_contour_oracle, oracle_error_bound


def main():
    params = reduced_params()
    closed = gamma_l_closed(params)
    print(f"closed form gamma_L = {closed:.12f}")
    print(f"{'c tau0/lambda':>14} {'eps/lambda':>11} {'oracle':>16} {'rel dev':>10} {'bound':>10}")
    for window in np.logspace(1, 5, 5):
        for eps in (1e-8, 1e-6, 1e-4):
            tau0 = window * params.wavelength / params.c
            value = gamma_l_contour_oracle(params, tau0, eps)
            print(f"{window:>14.0e} {eps:>11.0e} {value:>16.12f} {abs(value / closed - 1):>10.2e} "
                  f"{oracle_error_bound(params, tau0, eps):>10.2e}")


if __name__ == "__main__":
    main()
