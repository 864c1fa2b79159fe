"""Quantum backaction of dispersive (phase-contrast / dark-ground) imaging on a BEC."""

__version__ = "0.1.0"

from .params import PhysicalParams, ValidationError, make_params, reduced_params  # noqa: E402
from .condensate import (  # noqa: E402
    GaussianMixtureProfile,
    GaussianProfile,
    GridProfile,
    column_density,
    effective_eta,
    fourier_density,
)
from .rates import BackactionRates, gamma_l_closed, gamma_l_contour_oracle, gamma_p, rates  # noqa: E402

__all__ = [
    "PhysicalParams",
    "ValidationError",
    "make_params",
    "reduced_params",
    "GaussianProfile",
    "GaussianMixtureProfile",
    "GridProfile",
    "column_density",
    "effective_eta",
    "fourier_density",
    "BackactionRates",
    "gamma_p",
    "gamma_l_closed",
    "gamma_l_contour_oracle",
    "rates",
]
