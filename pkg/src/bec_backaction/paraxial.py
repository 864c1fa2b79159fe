"""Paraxial optics: the field commutator and a split-step propagator.

The commutator of the paraxial field operators has the closed form

    C(x, y, z) = k0**2 / (i (2 pi)**2 (z - i0)) * exp(i k0 (x**2 + y**2) / (2 z) + i k0 z)

and behaves as a Green's function of the free paraxial equation.  The
``-i0`` prescription is realised by evaluating the closed form at the complex
point ``z - i*eps`` (default ``eps = 1e-9 * wavelength``); this keeps the
regularised kernel an exact solution of the same PDE.

The propagator integrates the steady-state optical Schroedinger equation

    i dE/dz = -laplacian_perp(E) / (2 k0) - (k0 chi / 2) E

with ``chi = chi0 * N * p0`` the local dimensionless susceptibility, using
symmetric (Strang) splitting and periodic FFT boundaries.  Pad the grid
yourself if the beam must not wrap around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .params import PhysicalParams, ValidationError

DEFAULT_EPS_FACTOR = 1e-9


class SingularityError(ArithmeticError):
    pass


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, error_estimate: float):
        self.error_estimate = error_estimate
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")


class GridMismatchError(ValueError):
    pass


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass
class ComplexField2D:
    """Transverse complex envelope on a uniform ``(nx, ny)`` grid.

    ``values[ix, iy]`` is the amplitude at ``(x[ix], y[iy])`` with the grid
    centred on the origin, ``x = (ix - nx/2) * dx``.  Unit incident amplitude
    is 1.
    """

    values: np.ndarray
    dx: float
    dy: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2:
            raise ValidationError("values", "field must be two-dimensional")
        nx, ny = self.values.shape
        if not (_is_pow2(nx) and _is_pow2(ny)):
            raise ValidationError("values", f"grid sizes must be powers of two, got {nx}x{ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise ValidationError("dx/dy", "grid spacing must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("values", "field contains non-finite values")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def x(self) -> np.ndarray:
        return grid_axis(self.nx, self.dx)

    @property
    def y(self) -> np.ndarray:
        return grid_axis(self.ny, self.dy)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def norm2(self) -> float:
        """Discrete ``sum |E|^2 dx dy``."""
        return float(np.sum(np.abs(self.values) ** 2) * self.dx * self.dy)

    def copy_with(self, values: np.ndarray, **metadata) -> "ComplexField2D":
        meta = dict(self.metadata)
        meta.update(metadata)
        return ComplexField2D(values, self.dx, self.dy, meta)


def grid_axis(n: int, d: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * d


def plane_wave(nx: int, ny: int, dx: float, dy: float, amplitude: complex = 1.0) -> ComplexField2D:
    return ComplexField2D(np.full((nx, ny), amplitude, dtype=complex), dx, dy)


def gaussian_beam(nx: int, ny: int, dx: float, dy: float, waist: float) -> ComplexField2D:
    """Collimated Gaussian with 1/e^2 intensity radius ``waist`` at its focus."""
    xx, yy = np.meshgrid(grid_axis(nx, dx), grid_axis(ny, dy), indexing="ij")
    return ComplexField2D(np.exp(-(xx**2 + yy**2) / waist**2).astype(complex), dx, dy)


def beam_radius(field: ComplexField2D, axis: int = 0) -> float:
    """1/e^2 intensity radius from the second moment, ``w = 2 sqrt(<x^2>)``."""
    intensity = np.abs(field.values) ** 2
    coord = field.x if axis == 0 else field.y
    marginal = intensity.sum(axis=1 - axis)
    total = marginal.sum()
    mean = np.sum(coord * marginal) / total
    var = np.sum((coord - mean) ** 2 * marginal) / total
    return 2.0 * math.sqrt(var)


# --- commutator -----------------------------------------------------------


def _eps(params: PhysicalParams, eps: float | None) -> float:
    if eps is None:
        return DEFAULT_EPS_FACTOR * params.wavelength
    if eps < 0 or not math.isfinite(eps):
        raise ValidationError("eps", f"regularization offset must be finite and >= 0, got {eps!r}")
    return float(eps)


def commutator_value(x, y, z, params: PhysicalParams, eps: float | None = None):
    """Regularised commutator ``C(x, y, z - i*eps)`` in m^-3.

    Accepts scalars or broadcastable arrays.
    """
    eps = _eps(params, eps)
    x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))
    if eps == 0 and np.any(z == 0):
        raise SingularityError("commutator is singular at z = 0 without regularization")
    k0 = params.k0
    zc = z - 1j * eps
    out = k0**2 / (1j * (2 * np.pi) ** 2 * zc) * np.exp(1j * k0 * (x**2 + y**2) / (2 * zc) + 1j * k0 * zc)
    return out[()] if out.ndim == 0 else out


def _fresnel_line_integral(beta: complex) -> tuple[complex, float]:
    """``int_{-inf}^{inf} exp(i beta u^2) du`` for Im(beta) >= 0, beta != 0.

    Integrated numerically along the steepest-descent ray ``u = exp(i theta) t``,
    where the integrand is a real decaying Gaussian; the rotation is allowed
    because the integrand is entire and decays in the swept sector.
    """
    theta = 0.5 * (0.5 * np.pi - np.angle(beta))
    rot = np.exp(1j * theta)
    decay = -1j * beta * rot**2  # real part > 0 on the ray
    cutoff = 12.0 / math.sqrt(abs(decay))

    def re(t):
        return np.exp(-decay * t * t).real

    def im(t):
        return np.exp(-decay * t * t).imag

    vr, er = integrate.quad(re, 0.0, cutoff, epsabs=0.0, epsrel=1e-12, limit=200)
    vi, ei = integrate.quad(im, 0.0, cutoff, epsabs=0.0, epsrel=1e-12, limit=200)
    value = 2.0 * rot * (vr + 1j * vi)
    return value, 2.0 * math.hypot(er, ei)


def transverse_integral(z: float, params: PhysicalParams, eps: float | None = None, rtol: float = 1e-9) -> complex:
    """``iint C(x, y, z) dx dy`` in m^-1 by quadrature of the closed form.

    The double integral factorises into two Fresnel-type line integrals; each
    one is evaluated with adaptive Gauss-Kronrod on a rotated contour.  The
    analytic value is ``exp(i k0 (z - i eps)) / wavelength``.
    """
    eps = _eps(params, eps)
    if z == 0:
        raise SingularityError("transverse integral needs z != 0")
    k0 = params.k0
    zc = z - 1j * eps
    beta = k0 / (2 * zc)
    line, err = _fresnel_line_integral(beta)
    prefactor = k0**2 / (1j * (2 * np.pi) ** 2 * zc) * np.exp(1j * k0 * zc)
    value = prefactor * line * line
    abs_err = abs(prefactor) * 2 * abs(line) * err
    if abs_err > rtol * abs(value):
        raise QuadratureError("transverse integral did not converge", abs_err / abs(value))
    return complex(value)


def greens_pde_residual(x: float, y: float, z: float, params: PhysicalParams, h: float, eps: float | None = None) -> float:
    """Relative residual of ``(-i d/dz - laplacian_perp / (2 k0) - k0) C = 0``.

    Derivatives are second-order central differences with step ``h``.
    """
    k0 = params.k0

    def C(dx=0.0, dy=0.0, dz=0.0):
        return commutator_value(x + dx, y + dy, z + dz, params, eps)

    c0 = C()
    dcdz = (C(dz=h) - C(dz=-h)) / (2 * h)
    lap = (C(dx=h) + C(dx=-h) + C(dy=h) + C(dy=-h) - 4 * c0) / h**2
    residual = -1j * dcdz - lap / (2 * k0) - k0 * c0
    return float(abs(residual) / abs(k0 * c0))


# --- propagation ----------------------------------------------------------

MAX_STEP_PHASE = np.pi / 4


def _k_squared(nx: int, ny: int, dx: float, dy: float) -> np.ndarray:
    kx = 2 * np.pi * np.fft.fftfreq(nx, dx)
    ky = 2 * np.pi * np.fft.fftfreq(ny, dy)
    return kx[:, None] ** 2 + ky[None, :] ** 2


def propagate(
    field: ComplexField2D,
    susceptibility,
    z_extent: float,
    n_steps: int,
    params: PhysicalParams,
) -> ComplexField2D:
    """Split-step propagation over ``z_extent`` in ``n_steps`` equal steps.

    Parameters
    ----------
    field : ComplexField2D
        Input envelope.
    susceptibility : None, array (nx, ny) or array (n_steps, nx, ny)
        Local dimensionless susceptibility ``chi0 * N * p0``.  A 2D array is
        used for every step; a 3D array gives one slice per step, sampled at
        the step midpoint.  ``None`` means vacuum.
    z_extent : float
        Propagation length in m.
    n_steps : int
        Number of symmetric steps (half diffraction, medium, half diffraction).

    Returns
    -------
    ComplexField2D
        Output field; ``metadata`` carries ``max_step_phase`` and an
        ``accuracy_warning`` flag when a step imprints more than pi/4.
    """
    if int(n_steps) < 1:
        raise ValidationError("n_steps", "must be >= 1")
    n_steps = int(n_steps)
    nx, ny = field.shape
    if susceptibility is None:
        chi = None
    else:
        chi = np.asarray(susceptibility, dtype=float)
        if chi.ndim == 2:
            if chi.shape != (nx, ny):
                raise GridMismatchError(f"medium grid {chi.shape} != field grid {(nx, ny)}")
        elif chi.ndim == 3:
            if chi.shape != (n_steps, nx, ny):
                raise GridMismatchError(f"medium slices {chi.shape} != {(n_steps, nx, ny)}")
        else:
            raise GridMismatchError("medium must be 2D or 3D")

    k0 = params.k0
    dz = z_extent / n_steps
    half_kernel = np.exp(-1j * _k_squared(nx, ny, field.dx, field.dy) * dz / (4 * k0))

    max_phase = 0.0 if chi is None else float(k0 * np.max(np.abs(chi)) * abs(dz) / 2)
    static_phase = None
    if chi is not None and chi.ndim == 2:
        static_phase = np.exp(1j * k0 * chi * dz / 2)

    spec = np.fft.fft2(field.values)
    for step in range(n_steps):
        spec *= half_kernel
        if chi is not None:
            u = np.fft.ifft2(spec)
            u *= static_phase if static_phase is not None else np.exp(1j * k0 * chi[step] * dz / 2)
            spec = np.fft.fft2(u)
        spec *= half_kernel
    out = np.fft.ifft2(spec)
    return field.copy_with(
        out,
        max_step_phase=max_phase,
        accuracy_warning=bool(max_phase > MAX_STEP_PHASE),
        z_extent=float(z_extent),
        n_steps=n_steps,
    )


def thin_phase_mask(field: ComplexField2D, eta_map, atom_count: float, params: PhysicalParams) -> ComplexField2D:
    """Imprint the thin-object phase ``(k0 chi0 / 2) N eta(x, y)``."""
    eta = np.asarray(eta_map, dtype=float)
    if eta.shape != field.shape:
        raise GridMismatchError(f"column density grid {eta.shape} != field grid {field.shape}")
    phase = 0.5 * params.k0 * params.chi0 * atom_count * eta
    return field.copy_with(field.values * np.exp(1j * phase))
