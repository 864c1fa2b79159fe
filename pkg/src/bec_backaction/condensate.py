"""Spatial models of the condensate mode.

A profile describes the normalised single-atom density ``p0`` (m^-3, unit
integral) together with the atom count ``N``.  Three kinds exist:

* :class:`GaussianProfile`: closed forms everywhere.
* :class:`GaussianMixtureProfile`: weighted sum of Gaussians, still closed form.
* :class:`GridProfile`: samples on a uniform 3D grid centred on the origin.

The scalar effective column density ``eta`` is the *peak* of the column
density map ``int p0 dz``; local values are available from
:func:`column_density`.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import gridio
from .paraxial import grid_axis
from .params import ValidationError

NORM_TOL = 1e-9


def _triple(name, value) -> tuple[float, float, float]:
    vals = tuple(float(v) for v in value)
    if len(vals) != 3:
        raise ValidationError(name, "needs three components")
    return vals


@dataclass(frozen=True)
class GaussianProfile:
    """Gaussian ``p0`` with standard deviations ``(a_x, a_y, a_z)``."""

    widths: tuple[float, float, float]
    atom_count: float = 1.0
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        widths = _triple("widths", self.widths)
        if not all(math.isfinite(a) and a > 0 for a in widths):
            raise ValidationError("widths", f"all Gaussian widths must be > 0, got {widths}")
        if not (math.isfinite(self.atom_count) and self.atom_count >= 0):
            raise ValidationError("atom_count", "must be finite and >= 0")
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "center", _triple("center", self.center))

    def density(self, x, y, z):
        ax, ay, az = self.widths
        cx, cy, cz = self.center
        norm = (2 * np.pi) ** 1.5 * ax * ay * az
        return np.exp(-0.5 * (((x - cx) / ax) ** 2 + ((y - cy) / ay) ** 2 + ((z - cz) / az) ** 2)) / norm

    def column(self, x, y):
        ax, ay, _ = self.widths
        cx, cy, _ = self.center
        return np.exp(-0.5 * (((x - cx) / ax) ** 2 + ((y - cy) / ay) ** 2)) / (2 * np.pi * ax * ay)

    def fourier(self, kx, ky, kz):
        ax, ay, az = self.widths
        cx, cy, cz = self.center
        envelope = np.exp(-0.5 * ((ax * kx) ** 2 + (ay * ky) ** 2 + (az * kz) ** 2))
        return envelope * np.exp(-1j * (kx * cx + ky * cy + kz * cz))

    def extent(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.array(self.center)
        w = np.array(self.widths)
        return c - w, c + w

    def to_dict(self) -> dict:
        return {"kind": "gaussian", "widths": list(self.widths), "center": list(self.center), "atom_count": self.atom_count}


@dataclass(frozen=True)
class GaussianMixtureProfile:
    """Convex combination of Gaussian components (weights are normalised)."""

    components: tuple[GaussianProfile, ...]
    weights: tuple[float, ...]
    atom_count: float = 1.0

    def __post_init__(self):
        if len(self.components) == 0 or len(self.components) != len(self.weights):
            raise ValidationError("components", "need one weight per component and at least one component")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
            raise ValidationError("weights", "weights must be non-negative with positive sum")
        object.__setattr__(self, "weights", tuple(w / w.sum()))
        object.__setattr__(self, "components", tuple(self.components))

    def density(self, x, y, z):
        return sum(w * g.density(x, y, z) for w, g in zip(self.weights, self.components))

    def column(self, x, y):
        return sum(w * g.column(x, y) for w, g in zip(self.weights, self.components))

    def fourier(self, kx, ky, kz):
        return sum(w * g.fourier(kx, ky, kz) for w, g in zip(self.weights, self.components))

    def extent(self) -> tuple[np.ndarray, np.ndarray]:
        lows, highs = zip(*(g.extent() for g in self.components))
        return np.min(lows, axis=0), np.max(highs, axis=0)

    def to_dict(self) -> dict:
        return {
            "kind": "mixture",
            "weights": list(self.weights),
            "components": [g.to_dict() for g in self.components],
            "atom_count": self.atom_count,
        }


@dataclass(frozen=True, eq=False)
class GridProfile:
    """Sampled ``p0`` on a centred grid; ``values[ix, iy, iz]`` in m^-3."""

    values: np.ndarray
    spacing: tuple[float, float, float]
    atom_count: float = 1.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 3:
            raise ValidationError("values", "grid profile must be 3D")
        spacing = _triple("spacing", self.spacing)
        if not all(d > 0 for d in spacing):
            raise ValidationError("spacing", "grid spacing must be positive")
        if not np.isfinite(values).all() or np.any(values < 0):
            raise ValidationError("values", "density must be finite and non-negative")
        total = values.sum() * spacing[0] * spacing[1] * spacing[2]
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError("values", f"density integrates to {total!r}, expected 1")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "spacing", spacing)

    @classmethod
    def normalized(cls, values, spacing, atom_count: float = 1.0, **metadata) -> "GridProfile":
        values = np.asarray(values, dtype=float)
        total = values.sum() * float(np.prod(spacing))
        if total <= 0:
            raise ValidationError("values", "density has zero mass")
        return cls(values / total, tuple(spacing), atom_count, dict(metadata))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(grid_axis(n, d) for n, d in zip(self.values.shape, self.spacing))

    def to_dict(self) -> dict:
        digest = hashlib.sha256(np.ascontiguousarray(self.values).tobytes()).hexdigest()[:16]
        return {
            "kind": "grid",
            "shape": list(self.shape),
            "spacing": list(self.spacing),
            "atom_count": self.atom_count,
            "values_sha256_16": digest,
        }

    def save(self, path) -> None:
        gridio.write_density(path, self.values, self.spacing)

    @classmethod
    def load(cls, path, atom_count: float = 1.0) -> "GridProfile":
        values, spacing = gridio.read_density(path)
        return cls.normalized(values, spacing, atom_count, source=str(path))


Profile = GaussianProfile | GaussianMixtureProfile | GridProfile


def profile_digest(profile: Profile) -> str:
    blob = json.dumps(profile.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def with_atom_count(profile: Profile, atom_count: float) -> Profile:
    return replace(profile, atom_count=atom_count)


# --- generators -------------------------------------------------------------


def sample_grid(profile: GaussianProfile | GaussianMixtureProfile, shape, spacing) -> GridProfile:
    """Sample an analytic profile on a centred grid and renormalise."""
    axes = [grid_axis(n, d) for n, d in zip(shape, spacing)]
    xx, yy, zz = np.meshgrid(*axes, indexing="ij")
    return GridProfile.normalized(profile.density(xx, yy, zz), spacing, profile.atom_count, source="sampled")


def gaussian_grid(widths, n: int = 64, extent: float = 6.0, atom_count: float = 1.0) -> GridProfile:
    """Gaussian sampled on an ``n^3`` grid spanning ``+-extent`` widths per axis."""
    widths = _triple("widths", widths)
    spacing = tuple(2 * extent * a / n for a in widths)
    return sample_grid(GaussianProfile(widths, atom_count), (n, n, n), spacing)


def box_grid(lengths, shape, spacing, atom_count: float = 1.0) -> GridProfile:
    """Uniform box of side ``lengths`` centred on the origin."""
    axes = [grid_axis(n, d) for n, d in zip(shape, spacing)]
    masks = [np.abs(ax) < L / 2 for ax, L in zip(axes, lengths)]
    values = masks[0][:, None, None] & masks[1][None, :, None] & masks[2][None, None, :]
    return GridProfile.normalized(values.astype(float), spacing, atom_count, source="box")


def thomas_fermi_grid(radii, shape, spacing, atom_count: float = 1.0) -> GridProfile:
    """Inverted-parabola density ``max(0, 1 - sum (x_i / R_i)^2)``, normalised."""
    axes = [grid_axis(n, d) for n, d in zip(shape, spacing)]
    xx, yy, zz = np.meshgrid(*axes, indexing="ij")
    rx, ry, rz = _triple("radii", radii)
    values = np.clip(1 - (xx / rx) ** 2 - (yy / ry) ** 2 - (zz / rz) ** 2, 0, None)
    return GridProfile.normalized(values, spacing, atom_count, source="thomas-fermi")


# --- operations -------------------------------------------------------------


def transverse_grid(profile: Profile, n: int = 128, extent: float = 8.0):
    """Default ``(x, y)`` axes covering an analytic profile (``+-extent`` widths)."""
    if isinstance(profile, GridProfile):
        x, y, _ = profile.axes()
        return x, y
    low, high = profile.extent()
    center = 0.5 * (low + high)
    half = 0.5 * (high - low)
    span = half + (extent - 1) * np.min(
        [g.widths for g in getattr(profile, "components", (profile,))], axis=0
    )
    dx = 2 * span[0] / n
    dy = 2 * span[1] / n
    return center[0] + grid_axis(n, dx), center[1] + grid_axis(n, dy)


def column_density(profile: Profile, x=None, y=None) -> np.ndarray:
    """Column density map ``eta(x, y) = int p0 dz`` in m^-2.

    Grid profiles use their own transverse grid (z-sum times dz, which keeps
    the discrete normalisation exact); analytic profiles are evaluated on the
    supplied axes or on :func:`transverse_grid`.
    """
    if isinstance(profile, GridProfile):
        return profile.values.sum(axis=2) * profile.spacing[2]
    if x is None or y is None:
        x, y = transverse_grid(profile)
    xx, yy = np.meshgrid(np.asarray(x, float), np.asarray(y, float), indexing="ij")
    return profile.column(xx, yy)


def effective_eta(profile: Profile) -> float:
    """Peak column density in m^-2."""
    if isinstance(profile, GaussianProfile):
        ax, ay, _ = profile.widths
        return 1.0 / (2 * np.pi * ax * ay)
    if isinstance(profile, GridProfile):
        return float(column_density(profile).max())
    # mixture: coarse grid search, then polish the best candidate
    x, y = transverse_grid(profile, n=256)
    eta = column_density(profile, x, y)
    i, j = np.unravel_index(np.argmax(eta), eta.shape)
    res = optimize.minimize(lambda p: -profile.column(p[0], p[1]), x0=[x[i], y[j]], method="Nelder-Mead",
                            options={"xatol": 1e-12 * (x[1] - x[0]), "fatol": 1e-16, "maxiter": 2000})
    return float(max(-res.fun, eta[i, j]))


def fourier_density(profile: Profile, k) -> np.ndarray:
    """``p0~(k) = int p0(x) exp(-i k.x) d^3x`` at wavevectors ``k[..., 3]``.

    Grid profiles use the direct (separable) discrete transform, which equals
    the FFT on FFT frequencies and extends it to arbitrary ``k``.
    """
    k = np.asarray(k, dtype=float)
    kx, ky, kz = k[..., 0], k[..., 1], k[..., 2]
    if not isinstance(profile, GridProfile):
        return profile.fourier(kx, ky, kz)
    x, y, z = profile.axes()
    dv = float(np.prod(profile.spacing))
    flat = k.reshape(-1, 3)
    out = np.empty(len(flat), dtype=complex)
    for i, (qx, qy, qz) in enumerate(flat):
        ex = np.exp(-1j * qx * x)
        ey = np.exp(-1j * qy * y)
        ez = np.exp(-1j * qz * z)
        out[i] = np.einsum("ijk,i,j,k->", profile.values, ex, ey, ez) * dv
    return out.reshape(kx.shape)


def fourier_density_grid(profile: GridProfile) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """FFT of a grid profile on its natural frequency grid.

    Returns ``(p0_tilde, (kx, ky, kz))`` with unshifted FFT ordering and the
    phase referenced to the centred coordinate origin.
    """
    shape = profile.shape
    ks = tuple(2 * np.pi * np.fft.fftfreq(n, d) for n, d in zip(shape, profile.spacing))
    spec = np.fft.fftn(np.fft.ifftshift(profile.values)) * float(np.prod(profile.spacing))
    return spec, ks


def column_fourier_grid(profile: GridProfile) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """``p0~(kx, ky, 0)`` on the FFT grid, computed from the 3D FFT's kz = 0 plane."""
    spec, (kx, ky, _) = fourier_density_grid(profile)
    return spec[:, :, 0], (kx, ky)
