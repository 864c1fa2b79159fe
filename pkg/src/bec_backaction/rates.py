"""Backaction rates: phase diffusion (gamma_P) and depletion (gamma_L).

Closed forms, with ``s = chi0**2 I / (hbar c)``:

    gamma_P = (pi / 4) (s / lambda) iint eta(x, y)**2 dx dy
            = (pi / 4) s k0 / (2 pi)**3 iint |p0~(kx, ky, 0)|**2 dkx dky
    gamma_L = (pi**2 / 4) s / lambda**3

``gamma_L`` does not depend on the condensate shape.  The depletion oracle
integrates the regularised on-axis commutator instead of using the closed
form.  The phase-diffusion formulas assume a condensate much wider than the
wavelength; for transverse sizes below ``lambda / (2 pi)`` they overshoot the
exact bound ``gamma_P <= gamma_L``, which :func:`rates` reports as an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .condensate import (
    GridProfile,
    Profile,
    column_density,
    column_fourier_grid,
    fourier_density,
    profile_digest,
    transverse_grid,
)
from .paraxial import QuadratureError, commutator_value
from .params import PhysicalParams, ValidationError

PARSEVAL_RTOL = 1e-4


class ResolutionError(ArithmeticError):
    """Real-space and k-space phase-diffusion routes disagree."""


class ConsistencyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PhaseDiffusion:
    real_space: float
    k_space: float

    @property
    def rel_diff(self) -> float:
        scale = max(abs(self.real_space), abs(self.k_space))
        return 0.0 if scale == 0 else abs(self.real_space - self.k_space) / scale


def phase_diffusion_routes(profile: Profile, params: PhysicalParams, n: int = 128, extent: float = 8.0) -> PhaseDiffusion:
    """Both quadrature routes for gamma_P, unchecked.

    Analytic profiles are sampled on an ``n x n`` transverse grid spanning
    ``+-extent`` widths; the k-space route uses the closed-form transform on
    the reciprocal grid.  Grid profiles use their own grid and its FFT.
    """
    s = params.rate_prefactor
    lam = params.wavelength
    if isinstance(profile, GridProfile):
        dx, dy, _ = profile.spacing
        eta = column_density(profile)
        pk, (kx, ky) = column_fourier_grid(profile)
    else:
        x, y = transverse_grid(profile, n=n, extent=extent)
        dx, dy = x[1] - x[0], y[1] - y[0]
        eta = column_density(profile, x, y)
        kx = 2 * np.pi * np.fft.fftfreq(len(x), dx)
        ky = 2 * np.pi * np.fft.fftfreq(len(y), dy)
        kxx, kyy = np.meshgrid(kx, ky, indexing="ij")
        pk = fourier_density(profile, np.stack([kxx, kyy, np.zeros_like(kxx)], axis=-1))
    dkx = 2 * np.pi / (len(kx) * dx)
    dky = 2 * np.pi / (len(ky) * dy)
    real_space = 0.25 * np.pi * s / lam * float(np.sum(eta**2)) * dx * dy
    k_space = 0.25 * np.pi * s * params.k0 / (2 * np.pi) ** 3 * float(np.sum(np.abs(pk) ** 2)) * dkx * dky
    return PhaseDiffusion(float(real_space), float(k_space))


def gamma_p(profile: Profile, params: PhysicalParams, n: int = 128, extent: float = 8.0, rtol: float = PARSEVAL_RTOL) -> float:
    """Phase-diffusion rate in 1/s (real-space route, Parseval cross-checked)."""
    routes = phase_diffusion_routes(profile, params, n=n, extent=extent)
    if routes.rel_diff > rtol:
        raise ResolutionError(
            f"gamma_P routes disagree: real-space {routes.real_space:.6e} vs k-space "
            f"{routes.k_space:.6e} (rel {routes.rel_diff:.2e} > {rtol:.0e}); use a finer or wider grid"
        )
    return routes.real_space


def gamma_p_gaussian(widths, params: PhysicalParams) -> float:
    """Analytic gamma_P for a Gaussian: ``s / (16 lambda a_x a_y)``."""
    ax, ay = widths[0], widths[1]
    return params.rate_prefactor / (16 * params.wavelength * ax * ay)


def gamma_l_closed(params: PhysicalParams) -> float:
    """Universal depletion rate ``(pi**2 / 4) s / lambda**3`` in 1/s."""
    return 0.25 * np.pi**2 * params.rate_prefactor / params.wavelength**3


def _pole_integral(half_length: float, eps: float) -> tuple[complex, float]:
    """``int_{-L}^{L} dz / (z - i eps)`` by adaptive Gauss-Kronrod, split at 0."""
    n_breaks = max(1, int(math.ceil(math.log10(half_length / eps))))
    breaks = eps * np.logspace(0, n_breaks, n_breaks + 1)
    breaks = breaks[breaks < half_length]

    def re(z):
        return z / (z * z + eps * eps)

    def im(z):
        return eps / (z * z + eps * eps)

    total = 0j
    err = 0.0
    for sign in (-1.0, 1.0):
        pts = sign * breaks
        a, b = (-half_length, 0.0) if sign < 0 else (0.0, half_length)
        vr, er = integrate.quad(re, a, b, points=pts, limit=500, epsabs=1e-13, epsrel=1e-12)
        vi, ei = integrate.quad(im, a, b, points=pts, limit=500, epsabs=1e-13, epsrel=1e-12)
        total += vr + 1j * vi
        err += er + ei
    return total, err


def gamma_l_contour_oracle(params: PhysicalParams, tau0: float, eps: float) -> float:
    """gamma_L by integrating ``(k0/8) s C(z e_z) exp(-i k0 z)`` over ``|z| < c tau0``.

    The commutator carries the ``z - i eps`` regularisation; the carrier
    ``exp(-i k0 z)`` is removed at the same complex point so the integrand is
    exactly ``k0**2 / (i (2 pi)**2 (z - i eps))``.
    """
    lam = params.wavelength
    if not (eps > 0 and math.isfinite(eps)):
        raise ValidationError("eps", f"regularization must be > 0, got {eps!r}")
    half_length = params.c * tau0
    if not half_length >= 10 * lam:
        raise ValidationError("tau0", f"c*tau0 = {half_length:.3e} m must be >= 10 wavelengths")
    k0 = params.k0

    # integrand prefactor taken from the commutator itself at a reference point
    z_ref = lam
    kernel_ref = commutator_value(0.0, 0.0, z_ref, params, eps) * np.exp(-1j * k0 * (z_ref - 1j * eps))
    prefactor = kernel_ref * (z_ref - 1j * eps)  # = k0**2 / (i (2 pi)**2)

    integral, err = _pole_integral(half_length, eps)
    exact = 2j * math.atan(half_length / eps)
    if abs(integral - exact) > 1e-8 * abs(exact):
        raise QuadratureError("pole integral disagrees with its antiderivative", abs(integral - exact) / abs(exact))
    value = 0.125 * k0 * params.rate_prefactor * prefactor * integral
    return float(value.real)


def oracle_error_bound(params: PhysicalParams, tau0: float, eps: float) -> float:
    """Relative truncation error of the oracle, ``|1 - (2/pi) atan(c tau0 / eps)|``."""
    return abs(1.0 - 2.0 / math.pi * math.atan(params.c * tau0 / eps))


@dataclass(frozen=True)
class BackactionRates:
    """Real parts of Gamma_P, Gamma_L plus user-supplied imaginary parts (1/s)."""

    gamma_p: float
    gamma_l: float
    im_gamma_p: float = 0.0
    im_gamma_l: float = 0.0
    tau0: float | None = None

    @property
    def Gamma_P(self) -> complex:
        return complex(self.gamma_p, self.im_gamma_p)

    @property
    def Gamma_L(self) -> complex:
        return complex(self.gamma_l, self.im_gamma_l)

    @property
    def depletion(self) -> complex:
        """``Gamma_L - Gamma_P``, the coefficient of the loss generator."""
        return self.Gamma_L - self.Gamma_P

    @property
    def ratio(self) -> float:
        return self.gamma_p / self.gamma_l if self.gamma_l else 0.0

    def scaled(self, factor: float) -> "BackactionRates":
        return BackactionRates(self.gamma_p * factor, self.gamma_l * factor,
                               self.im_gamma_p * factor, self.im_gamma_l * factor, self.tau0)


def rates(
    profile: Profile,
    params: PhysicalParams,
    im_parts: tuple[float, float] = (0.0, 0.0),
    tau0: float | None = None,
    n: int = 128,
    extent: float = 8.0,
) -> BackactionRates:
    gp = gamma_p(profile, params, n=n, extent=extent)
    gl = gamma_l_closed(params)
    if gp - gl > 1e-12 * gl:
        raise ConsistencyError(
            f"gamma_P = {gp:.6e} exceeds gamma_L = {gl:.6e}; the condensate is too compact "
            "(transverse size below ~lambda/2pi) for the paraxial phase-diffusion formula"
        )
    return BackactionRates(gp, gl, float(im_parts[0]), float(im_parts[1]), tau0)


def rates_record(result: BackactionRates, params: PhysicalParams, profile: Profile, eps: float | None = None,
                 oracle: float | None = None) -> dict:
    record = {
        "gamma_p": result.gamma_p,
        "gamma_l": result.gamma_l,
        "im_gamma_p": result.im_gamma_p,
        "im_gamma_l": result.im_gamma_l,
        "ratio": result.ratio,
        "params": params.to_dict(),
        "profile_digest": profile_digest(profile),
        "tau0": result.tau0,
        "epsilon": eps,
    }
    if oracle is not None:
        record["gamma_l_oracle"] = oracle
        record["oracle_rel_deviation"] = abs(oracle - result.gamma_l) / result.gamma_l if result.gamma_l else 0.0
    return record
