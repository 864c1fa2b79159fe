"""Step-count convergence of the split-step propagator.

Uses the ground mode of a parabolic medium, whose exact propagation is a
pure phase, and prints the error for successive step doublings.

    python scripts/propagation_convergence.py
"""

import math

import numpy as np

from bec_backaction.paraxial import ComplexField2D, grid_axis, propagate
from bec_backaction.params import reduced_params


def main():
    params = reduced_params()
    alpha, d, n, length = 1e-3, 0.25, 128, 200.0
    omega = math.sqrt(alpha)
    x = grid_axis(n, d)
    r2 = x[:, None] ** 2 + x[None, :] ** 2
    mode = ComplexField2D(np.exp(-params.k0 * omega * r2 / 2).astype(complex), d, d)
    exact = mode.values * np.exp(-1j * omega * length)
    prev = None
    print(f"{'steps':>6} {'rel error':>12} {'ratio':>7}")
    for steps in (25, 50, 100, 200, 400):
        out = propagate(mode, -alpha * r2, length, steps, params)
        err = np.linalg.norm(out.values - exact) / np.linalg.norm(exact)
        ratio = f"{prev / err:7.3f}" if prev else ""
        print(f"{steps:>6} {err:>12.4e} {ratio:>7}")
        prev = err


if __name__ == "__main__":
    main()
