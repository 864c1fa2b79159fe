"""Physical parameters shared by every part of the package.

All quantities are SI.  A "reduced mode" is available for analytic checks:
``reduced_params()`` picks lambda = 1 m, chi0 = 1 m^3 and I = hbar*c so that the
rate prefactor ``s = chi0**2 * I / (hbar * c)`` equals 1 m^3/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(name, f"must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PhysicalParams:
    """Probe wavelength, atomic susceptibility coefficient and intensity.

    Attributes
    ----------
    wavelength : float
        Optical wavelength in m.
    chi0 : float
        Single-atom susceptibility coefficient in m^3 (medium susceptibility
        is ``chi0 * |psi|^2``).
    intensity : float
        Plane-wave intensity in W/m^2.
    """

    wavelength: float
    chi0: float
    intensity: float
    hbar: float = field(default=HBAR)
    c: float = field(default=SPEED_OF_LIGHT)

    def __post_init__(self):
        wl = _check_finite("wavelength", self.wavelength)
        chi0 = _check_finite("chi0", self.chi0)
        intensity = _check_finite("intensity", self.intensity)
        _check_finite("hbar", self.hbar)
        _check_finite("c", self.c)
        if wl <= 0:
            raise ValidationError("wavelength", f"must be > 0, got {wl!r}")
        if chi0 <= 0:
            raise ValidationError("chi0", f"must be > 0, got {chi0!r}")
        if intensity < 0:
            raise ValidationError("intensity", f"must be >= 0, got {intensity!r}")
        if self.hbar <= 0 or self.c <= 0:
            raise ValidationError("hbar/c", "physical constants must be positive")

    @property
    def k0(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def omega0(self) -> float:
        return self.k0 * self.c

    @property
    def rate_prefactor(self) -> float:
        """``chi0**2 * I / (hbar * c)`` in m^3/s."""
        return self.chi0**2 * self.intensity / (self.hbar * self.c)

    def replace(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "wavelength": self.wavelength,
            "chi0": self.chi0,
            "intensity": self.intensity,
            "hbar": self.hbar,
            "c": self.c,
        }


def make_params(wavelength: float, chi0: float, intensity: float) -> PhysicalParams:
    return PhysicalParams(wavelength=wavelength, chi0=chi0, intensity=intensity)


def reduced_params(wavelength: float = 1.0, chi0: float = 1.0, intensity_scale: float = 1.0) -> PhysicalParams:
    """Unit-normalized parameters: ``I = intensity_scale * hbar * c``.

    With the defaults ``s = 1 m^3/s`` and ``lambda = 1 m``.
    """
    return PhysicalParams(wavelength=wavelength, chi0=chi0, intensity=intensity_scale * HBAR * SPEED_OF_LIGHT)
