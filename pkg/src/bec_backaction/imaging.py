"""Measurement side: signal, shot noise, depletion constant and image formation.

The depletion constant of an observation of length ``dt`` is
``kappa = 2 gamma_L dt``.  Expressed through the signal-to-noise ratio of the
image it reads ``kappa = (dphi / delta_phi)**2 (N lambda**2 eta)**-2``, an
exact identity within this model, so at fixed SNR it does not depend on
``chi0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .paraxial import ComplexField2D
from .params import PhysicalParams, ValidationError
from .rates import ConsistencyError, gamma_l_closed

DARK_GROUND = "dark-ground"
PHASE_CONTRAST = "phase-contrast"
MODES = (DARK_GROUND, PHASE_CONTRAST)
KAPPA_IDENTITY_RTOL = 1e-12


class ExpansionWarning(UserWarning):
    """The weak-medium expansion of the refractive index is questionable."""


class NoSignalError(ValueError):
    pass


@dataclass(frozen=True)
class ObservationPlan:
    duration: float
    mode: str = PHASE_CONTRAST
    snr_target: float | None = None

    def __post_init__(self):
        if not self.duration > 0:
            raise ValidationError("duration", "observation time must be > 0")
        if self.mode not in MODES:
            raise ValidationError("mode", f"expected one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class BackactionReport:
    delta_phi: float
    delta_phi_noise: float
    n_bar: float
    snr: float
    kappa: float
    kappa_from_snr: float

    @property
    def survival(self) -> float:
        return math.exp(-self.kappa)

    @property
    def log_survival(self) -> float:
        return -self.kappa

    def to_dict(self) -> dict:
        return {
            "delta_phi": self.delta_phi,
            "delta_phi_noise": self.delta_phi_noise,
            "n_bar": self.n_bar,
            "snr": self.snr,
            "kappa": self.kappa,
            "kappa_from_snr": self.kappa_from_snr,
            "survival": self.survival,
        }


def signal_phase(params: PhysicalParams, atom_count: float, eta: float, peak_density: float | None = None) -> float:
    """Peak phase shift ``(pi / lambda) chi0 N eta`` in rad.

    If ``peak_density`` (max of p0, m^-3) is given, warns when
    ``chi0 N max(p0) >= 0.5`` where the square-root expansion degrades.
    """
    if peak_density is not None and params.chi0 * atom_count * peak_density >= 0.5:
        warnings.warn(
            f"chi0*N*max(p0) = {params.chi0 * atom_count * peak_density:.3g} >= 0.5; "
            "weak-medium expansion of the phase is inaccurate",
            ExpansionWarning,
            stacklevel=2,
        )
    return math.pi / params.wavelength * params.chi0 * atom_count * eta


def mean_photon_number(params: PhysicalParams, duration: float) -> float:
    """Photons in a cylinder of radius lambda and length ``c * duration``."""
    if not duration > 0:
        raise ValidationError("duration", "must be > 0")
    return math.pi * params.wavelength**2 * params.intensity * duration / (params.hbar * params.omega0)


def phase_noise(n_bar: float) -> float:
    """Shot-noise phase uncertainty ``n_bar ** -0.5``."""
    if not n_bar > 0:
        raise ValidationError("n_bar", "phase noise is undefined without photons")
    return n_bar**-0.5


def kappa(params: PhysicalParams, atom_count: float, eta: float, duration: float) -> BackactionReport:
    """Depletion constant of an observation, cross-checked against the SNR form."""
    kap = 2.0 * gamma_l_closed(params) * duration
    dphi = signal_phase(params, atom_count, eta)
    n_bar = mean_photon_number(params, duration)
    if n_bar == 0:
        return BackactionReport(dphi, math.inf, 0.0, 0.0, kap, 0.0)
    noise = phase_noise(n_bar)
    snr = dphi / noise
    if dphi == 0:
        return BackactionReport(dphi, noise, n_bar, 0.0, kap, math.nan)
    from_snr = snr**2 / (atom_count * params.wavelength**2 * eta) ** 2
    if abs(from_snr - kap) > KAPPA_IDENTITY_RTOL * kap:
        raise ConsistencyError(f"kappa identity violated: {kap!r} vs {from_snr!r}")
    return BackactionReport(dphi, noise, n_bar, snr, kap, from_snr)


def plan_for_snr(params: PhysicalParams, atom_count: float, eta: float, snr_target: float,
                 mode: str = PHASE_CONTRAST) -> ObservationPlan:
    """Shortest observation reaching ``dphi / delta_phi = snr_target``."""
    if not snr_target > 0:
        raise ValidationError("snr_target", "must be > 0")
    dphi = signal_phase(params, atom_count, eta)
    if dphi == 0:
        raise NoSignalError("no phase signal (N, eta or chi0 vanish)")
    if params.intensity == 0:
        raise NoSignalError("zero intensity cannot reach any SNR")
    n_bar = (snr_target / dphi) ** 2
    duration = n_bar * params.hbar * params.omega0 / (math.pi * params.wavelength**2 * params.intensity)
    return ObservationPlan(duration, mode, snr_target)


def rounded_kappa_estimate(atom_count: float) -> float:
    """Order-of-magnitude estimate ``1e10 / N**2`` for ``a_x a_y = 1e4 lambda**2``."""
    return 1e10 / atom_count**2


# --- image formation ----------------------------------------------------------


def _dc_mask(nx: int, ny: int, radius_bins: int) -> np.ndarray:
    ix = np.fft.fftfreq(nx, 1.0 / nx)
    iy = np.fft.fftfreq(ny, 1.0 / ny)
    return ix[:, None] ** 2 + iy[None, :] ** 2 <= radius_bins**2


def render_image(field: ComplexField2D, mode: str, dc_radius_bins: int = 0) -> np.ndarray:
    """Intensity after a focal-plane filter acting on the unscattered light.

    ``dark-ground`` blocks the DC bin(s); ``phase-contrast`` shifts them by
    pi/2.  ``dc_radius_bins`` widens the filter to a disk of that radius in
    FFT bins.
    """
    if mode not in MODES:
        raise ValidationError("mode", f"expected one of {MODES}, got {mode!r}")
    spec = np.fft.fft2(field.values)
    mask = _dc_mask(*field.shape, int(dc_radius_bins))
    if mode == DARK_GROUND:
        spec[mask] = 0.0
    else:
        spec[mask] *= 1j
    return np.abs(np.fft.ifft2(spec)) ** 2


def sample_counts(image: np.ndarray, photons_per_unit: float, seed: int) -> np.ndarray:
    """Poisson photon counts per pixel for mean ``photons_per_unit * image``."""
    rng = np.random.default_rng(seed)
    return rng.poisson(photons_per_unit * np.asarray(image))
