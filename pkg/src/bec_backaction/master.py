"""Master equation of the condensate mode in a truncated Fock basis.

    d rho / dt = -L1 rho - L2 rho

    <m| L1 rho |n> = [i Im(Gamma_P) (m^2 - n^2) + Re(Gamma_P) (m - n)^2] rho_mn
    L2 rho = Gamma (n rho - a rho a^+) + h.c.,   Gamma = Gamma_L - Gamma_P

L1 is phase diffusion (diagonal in (m, n), solved exactly when it acts
alone); L2 is depletion of the mode.  The general case is integrated with
fixed-step classical RK4.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .params import ValidationError
from .rates import BackactionRates

STABILITY_LIMIT = 0.1
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9
PSD_TOL = 1e-9


class StepSizeError(ValueError):
    def __init__(self, dt: float, suggested: float):
        self.dt = dt
        self.suggested_dt = suggested
        super().__init__(f"dt = {dt:.3e} s violates the stability guard; use dt <= {suggested:.3e} s")


@dataclass
class CondensateState:
    """Density matrix ``rho[m, n] = <m| rho |n>`` for ``m, n <= n_max``."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValidationError("rho", "density matrix must be square")
        self.rho = rho

    @property
    def n_max(self) -> int:
        return self.rho.shape[0] - 1

    def validate(self, trace_tol: float = TRACE_TOL, herm_tol: float = HERMITIAN_TOL, psd_tol: float = PSD_TOL) -> None:
        rho = self.rho
        if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
            raise ValidationError("rho", "density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > trace_tol:
            raise ValidationError("rho", f"trace {np.trace(rho).real:.12f} != 1")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -psd_tol:
            raise ValidationError("rho", "density matrix has negative eigenvalues")

    @classmethod
    def fock(cls, n: int, n_max: int) -> "CondensateState":
        if not 0 <= n <= n_max:
            raise ValidationError("n", f"Fock level {n} outside 0..{n_max}")
        rho = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        rho[n, n] = 1.0
        return cls(rho)

    @classmethod
    def from_ket(cls, amplitudes) -> "CondensateState":
        psi = np.asarray(amplitudes, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def superposition(cls, levels, n_max: int, phases=None) -> "CondensateState":
        """Equal-weight superposition of the given Fock levels."""
        psi = np.zeros(n_max + 1, dtype=complex)
        phases = np.zeros(len(levels)) if phases is None else phases
        for n, ph in zip(levels, phases):
            psi[n] = np.exp(1j * ph)
        return cls.from_ket(psi)

    @classmethod
    def coherent(cls, alpha: complex, n_max: int) -> "CondensateState":
        """Truncated (renormalised) coherent state."""
        n = np.arange(n_max + 1)
        log_fact = np.array([math.lgamma(k + 1) for k in n])
        amp = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * log_fact) * np.power(complex(alpha), n)
        return cls.from_ket(amp)

    def to_json(self) -> str:
        flat = self.rho.ravel()
        return json.dumps({"n_max": self.n_max, "rho_re": flat.real.tolist(), "rho_im": flat.imag.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "CondensateState":
        data = json.loads(text)
        dim = int(data["n_max"]) + 1
        rho = (np.asarray(data["rho_re"]) + 1j * np.asarray(data["rho_im"])).reshape(dim, dim)
        return cls(rho)


# --- Liouvillians -----------------------------------------------------------


def _levels(dim: int) -> np.ndarray:
    return np.arange(dim, dtype=float)


def apply_L1(rho: np.ndarray, gamma_p: complex) -> np.ndarray:
    """Phase-diffusion Liouvillian ``L1 rho`` (contributes ``-L1 rho`` to d rho/dt)."""
    n = _levels(rho.shape[0])
    m_, n_ = n[:, None], n[None, :]
    gamma_p = complex(gamma_p)
    factor = 1j * gamma_p.imag * (m_**2 - n_**2) + gamma_p.real * (m_ - n_) ** 2
    return factor * rho


def apply_L2(rho: np.ndarray, gamma_l: complex, gamma_p: complex) -> np.ndarray:
    """Depletion Liouvillian ``L2 rho`` with ``Gamma = Gamma_L - Gamma_P``."""
    g = complex(gamma_l) - complex(gamma_p)
    n = _levels(rho.shape[0])
    out = g * n[:, None] * rho + g.conjugate() * rho * n[None, :]
    # a rho a^+ : element (m, n) = sqrt((m+1)(n+1)) rho[m+1, n+1]
    jump = np.zeros_like(rho)
    root = np.sqrt(n[1:])
    jump[:-1, :-1] = root[:, None] * root[None, :] * rho[1:, 1:]
    out -= 2 * g.real * jump
    return out


def _as_rates(rates) -> tuple[complex, complex]:
    if isinstance(rates, BackactionRates):
        return rates.Gamma_P, rates.Gamma_L
    gp, gl = rates
    return complex(gp), complex(gl)


def generator(rho: np.ndarray, rates) -> np.ndarray:
    """Right-hand side ``-L1 rho - L2 rho``."""
    gp, gl = _as_rates(rates)
    return -apply_L1(rho, gp) - apply_L2(rho, gl, gp)


def liouvillian_matrix(n_max: int, rates) -> np.ndarray:
    """Dense superoperator of :func:`generator` acting on ``rho.ravel()``."""
    dim = n_max + 1
    size = dim * dim
    mat = np.empty((size, size), dtype=complex)
    basis = np.zeros((dim, dim), dtype=complex)
    for j in range(size):
        basis.flat[j] = 1.0
        mat[:, j] = generator(basis, rates).ravel()
        basis.flat[j] = 0.0
    return mat


def max_stable_dt(n_max: int, rates) -> float:
    gp, gl = _as_rates(rates)
    scale = max(abs(gp) * n_max**2, 2 * abs(gl - gp) * n_max)
    return math.inf if scale == 0 else STABILITY_LIMIT / scale


# --- evolution --------------------------------------------------------------


class _Rhs:
    """``generator`` with the (m, n)-dependent factors precomputed."""

    def __init__(self, dim: int, gp: complex, gl: complex):
        n = _levels(dim)
        g = gl - gp
        self.diag = -(1j * gp.imag * (n[:, None] ** 2 - n[None, :] ** 2)
                      + gp.real * (n[:, None] - n[None, :]) ** 2
                      + g * n[:, None] + g.conjugate() * n[None, :])
        root = np.sqrt(n[1:])
        self.jump = 2 * g.real * root[:, None] * root[None, :]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = self.diag * rho
        out[:-1, :-1] += self.jump * rho[1:, 1:]
        return out


def _rk4_step(rho: np.ndarray, h: float, rhs: _Rhs) -> np.ndarray:
    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * h * k1)
    k3 = rhs(rho + 0.5 * h * k2)
    k4 = rhs(rho + h * k3)
    out = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return 0.5 * (out + out.conj().T)


def _l1_exact(rho: np.ndarray, gamma_p: complex, t: float) -> np.ndarray:
    return rho * np.exp(-apply_L1(np.ones_like(rho), gamma_p) * t)


def evolve(state: CondensateState, rates, t: float, dt: float, method: str = "auto") -> CondensateState:
    """Evolve ``state`` for time ``t``.

    ``method="auto"`` uses the exact elementwise solution when the depletion
    coefficient ``Gamma_L - Gamma_P`` vanishes and RK4 otherwise; ``"rk4"``
    forces the integrator.  The RK4 step is ``t / ceil(t / dt)``.
    """
    _, final = evolve_series(state, rates, t, dt, n_records=1, method=method)
    return final[-1]


def evolve_series(state: CondensateState, rates, t: float, dt: float, n_records: int = 1,
                  method: str = "auto") -> tuple[np.ndarray, list[CondensateState]]:
    """Evolve and return ``n_records + 1`` equally spaced snapshots (incl. t = 0)."""
    if t < 0 or dt <= 0:
        raise ValidationError("t/dt", "need t >= 0 and dt > 0")
    if method not in ("auto", "rk4"):
        raise ValidationError("method", f"unknown method {method!r}")
    gp, gl = _as_rates(rates)
    n_max = state.n_max
    n_records = max(1, int(n_records))
    times = np.linspace(0.0, t, n_records + 1)
    snapshots = [CondensateState(state.rho.copy())]

    if method == "auto" and gl - gp == 0:
        for ti in times[1:]:
            snapshots.append(CondensateState(_l1_exact(state.rho, gp, ti)))
        return times, snapshots

    limit = max_stable_dt(n_max, (gp, gl))
    if dt > limit:
        raise StepSizeError(dt, limit)
    seg = t / n_records
    steps = max(1, math.ceil(seg / dt - 1e-12)) if seg > 0 else 0
    h = seg / steps if steps else 0.0
    rhs = _Rhs(n_max + 1, gp, gl)
    rho = state.rho.copy()
    for _ in range(n_records):
        for _ in range(steps):
            rho = _rk4_step(rho, h, rhs)
        snapshots.append(CondensateState(rho.copy()))
    return times, snapshots


# --- observables ------------------------------------------------------------


def mean_atom_number(state: CondensateState) -> float:
    return float(np.sum(_levels(state.rho.shape[0]) * np.diag(state.rho).real))


def populations(state: CondensateState) -> np.ndarray:
    return np.diag(state.rho).real.copy()


def trace(state: CondensateState) -> float:
    return float(np.trace(state.rho).real)


def purity(state: CondensateState) -> float:
    return float(np.sum(np.abs(state.rho) ** 2))


@dataclass(frozen=True)
class PhaseDistribution:
    """Probability density on ``phi_j = 2 pi j / n_phi``, integrating to 1."""

    phi: np.ndarray
    values: np.ndarray

    @property
    def n_phi(self) -> int:
        return len(self.phi)

    def integral(self) -> float:
        return float(np.sum(self.values) * 2 * np.pi / self.n_phi)

    def mean_resultant(self) -> complex:
        """``<exp(i phi)>``."""
        return complex(np.sum(np.exp(1j * self.phi) * self.values) * 2 * np.pi / self.n_phi)

    def wrapped_variance(self) -> float:
        """``-2 ln |<exp(i phi)>|``; grows as ``2 D t`` under diffusion with constant D."""
        return float(-2.0 * math.log(abs(self.mean_resultant())))


def phase_distribution(state: CondensateState, n_phi: int | None = None) -> PhaseDistribution:
    """``P(phi) = (2 pi)^-1 sum_mn exp(i (n - m) phi) rho_mn`` on a uniform grid.

    Requires ``n_phi >= 4 n_max``; the grid sum then integrates the truncated
    distribution exactly.
    """
    n_max = state.n_max
    if n_phi is None:
        n_phi = max(4 * n_max, 16)
    if n_phi < 4 * n_max:
        raise ValidationError("n_phi", f"need n_phi >= 4 n_max = {4 * n_max}")
    # coefficient of exp(i d phi) is the sum of the d-th superdiagonal, d = n - m
    coeffs = np.zeros(n_phi, dtype=complex)
    for d in range(-n_max, n_max + 1):
        coeffs[d % n_phi] += np.trace(state.rho, offset=d)
    values = np.fft.ifft(coeffs).real * n_phi / (2 * np.pi)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    return PhaseDistribution(phi, values)
