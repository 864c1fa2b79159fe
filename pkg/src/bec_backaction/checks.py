"""Self-check suites run by ``bec-backaction check``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import imaging
from .condensate import Profile
from .paraxial import greens_pde_residual, transverse_integral
from .params import PhysicalParams
from .rates import ResolutionError, gamma_l_closed, gamma_l_contour_oracle, phase_diffusion_routes


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "measured": float(self.measured),
                "tolerance": self.tolerance, "detail": self.detail}


def check_commutator_pde(params: PhysicalParams, rng: np.random.Generator, n_points: int = 20) -> CheckResult:
    lam = params.wavelength
    worst = 0.0
    for _ in range(n_points):
        x, y = rng.uniform(-1, 1, size=2) * lam
        z = rng.uniform(0.5, 3.0) * lam * rng.choice([-1.0, 1.0])
        worst = max(worst, greens_pde_residual(x, y, z, params, h=1e-4 * lam))
    return CheckResult("commutator_pde", worst < 1e-5, worst, 1e-5, f"{n_points} random points, h = 1e-4 lambda")


def check_transverse_integral(params: PhysicalParams) -> CheckResult:
    lam = params.wavelength
    zs = np.logspace(-3, 3, 13) * lam
    worst = max(abs(abs(transverse_integral(z, params)) * lam - 1) for z in zs)
    return CheckResult("transverse_integral", worst < 1e-6, worst, 1e-6, "|iint C| = 1/lambda, z in [1e-3, 1e3] lambda")


def check_tau0_independence(params: PhysicalParams, tau0: float, eps: float) -> CheckResult:
    closed = gamma_l_closed(params)
    a = gamma_l_contour_oracle(params, tau0, eps)
    b = gamma_l_contour_oracle(params, 2 * tau0, eps)
    drift = abs(b - a) / abs(a) if a else 0.0
    dev = abs(a - closed) / closed if closed else 0.0
    ok = drift < 1e-6 and dev < 1e-3
    return CheckResult("tau0_independence", ok, drift, 1e-6, f"oracle vs closed form rel deviation {dev:.3e} (tol 1e-3)")


def check_parseval(profile: Profile, params: PhysicalParams, n: int, extent: float) -> CheckResult:
    routes = phase_diffusion_routes(profile, params, n=n, extent=extent)
    ok = routes.rel_diff <= 1e-4
    detail = f"real-space {routes.real_space:.9e}, k-space {routes.k_space:.9e}"
    if not ok:
        detail += f"; {ResolutionError.__name__}: grid {n}x{n} too coarse, increase grid.nx/ny or extent"
    return CheckResult("parseval", ok, routes.rel_diff, 1e-4, detail)


def check_kappa_identity(rng: np.random.Generator, n_tuples: int = 100) -> CheckResult:
    worst = 0.0
    for _ in range(n_tuples):
        params = PhysicalParams(
            wavelength=10 ** rng.uniform(-7, -5),
            chi0=10 ** rng.uniform(-22, -18),
            intensity=10 ** rng.uniform(-2, 3),
        )
        N = 10 ** rng.uniform(2, 7)
        ax, ay = 10 ** rng.uniform(0, 2, size=2) * params.wavelength
        eta = 1.0 / (2 * math.pi * ax * ay)
        dt = 10 ** rng.uniform(-6, -2)
        rep = imaging.kappa(params, N, eta, dt)
        worst = max(worst, abs(rep.kappa_from_snr - rep.kappa) / rep.kappa)
    return CheckResult("kappa_identity", worst <= 1e-12, worst, 1e-12, f"{n_tuples} random tuples")


def run_all(params: PhysicalParams, profile: Profile, grid_n: int, grid_extent: float, tau0: float, eps: float,
            seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    # the commutator and oracle suites are scale-free; they run on the scenario wavelength
    return [
        check_commutator_pde(params, rng),
        check_transverse_integral(params),
        check_tau0_independence(params, tau0, eps),
        check_parseval(profile, params, grid_n, grid_extent),
        check_kappa_identity(rng),
    ]

