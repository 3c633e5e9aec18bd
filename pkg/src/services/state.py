"""Reduced qubit state, Husimi Q-function and the synchronization measure S(phi, t)."""
import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from src.services.errors import InvalidInputError

NORM_TOLERANCE = 1e-12
AMPLITUDE_SLACK = 1e-6
SYNC_BOUND = 0.125
MIN_MESH = 8
THETA_NODES = 401

_INV_2PI = 1.0 / (2.0 * math.pi)


@dataclass(frozen=True)
class InitialState:
    c_g: complex
    c_e: complex

    def __post_init__(self) -> None:
        norm = abs(self.c_g) ** 2 + abs(self.c_e) ** 2
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidInputError(f"initial amplitudes are not normalized (|c_g|^2+|c_e|^2={norm!r})")

    @classmethod
    def equal_superposition(cls) -> "InitialState":
        """(|g> + |e>)/sqrt(2): maximal coherence, phase preference at phi = 0."""
        amplitude = 1.0 / math.sqrt(2.0)
        return cls(c_g=complex(amplitude), c_e=complex(amplitude))

    @classmethod
    def from_polar(cls, c_g_abs: float, c_g_arg: float, c_e_abs: float, c_e_arg: float) -> "InitialState":
        return cls(c_g=cmath.rect(c_g_abs, c_g_arg), c_e=cmath.rect(c_e_abs, c_e_arg))

    @property
    def rho_ee(self) -> float:
        return abs(self.c_e) ** 2

    @property
    def rho_eg(self) -> complex:
        return self.c_e * self.c_g.conjugate()


@dataclass(frozen=True)
class QubitState:
    rho_ee: complex
    rho_eg: complex
    rho_ge: complex
    rho_gg: complex

    def __post_init__(self) -> None:
        if abs(self.rho_ee + self.rho_gg - 1.0) > NORM_TOLERANCE:
            raise InvalidInputError("density matrix trace differs from 1")
        if abs(self.rho_ge - self.rho_eg.conjugate()) > NORM_TOLERANCE:
            raise InvalidInputError("density matrix is not Hermitian")
        if abs(complex(self.rho_ee).imag) > NORM_TOLERANCE or abs(complex(self.rho_gg).imag) > NORM_TOLERANCE:
            raise InvalidInputError("populations must be real")
        if (self.rho_ee * self.rho_gg).real - abs(self.rho_eg) ** 2 < -NORM_TOLERANCE:
            raise InvalidInputError("density matrix is not positive semidefinite")

    @classmethod
    def maximally_mixed(cls) -> "QubitState":
        return cls(rho_ee=0.5, rho_eg=0j, rho_ge=0j, rho_gg=0.5)

    @classmethod
    def from_matrix(cls, matrix) -> "QubitState":
        """Build from a 2x2 array in the (|e>, |g>) basis."""
        m = np.asarray(matrix, dtype=complex)
        return cls(rho_ee=m[0, 0], rho_eg=m[0, 1], rho_ge=m[1, 0], rho_gg=m[1, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.rho_ee, self.rho_eg], [self.rho_ge, self.rho_gg]], dtype=complex)

    @property
    def purity(self) -> float:
        m = self.matrix
        return float(np.real(np.trace(m @ m)))

    @property
    def bloch_vector(self) -> tuple[float, float, float]:
        return (2.0 * self.rho_eg.real, -2.0 * self.rho_eg.imag, float(np.real(self.rho_ee - self.rho_gg)))


def density_matrix(init: InitialState, b: complex) -> QubitState:
    """Reduced state: rho_ee = |c_e|^2 |b|^2, rho_eg = c_e conj(c_g) b, rho_gg = 1 - rho_ee."""
    modulus = abs(b)
    if not math.isfinite(modulus) or modulus > 1.0 + AMPLITUDE_SLACK:
        raise InvalidInputError(f"|B| = {modulus!r} exceeds 1; amplitude cannot gain population")
    if modulus > 1.0:
        # Solver overshoot within tolerance; project back onto the unit circle.
        b = b / modulus
    rho_ee = init.rho_ee * abs(b) ** 2
    rho_eg = init.rho_eg * b
    return QubitState(rho_ee=rho_ee, rho_eg=rho_eg, rho_ge=rho_eg.conjugate(), rho_gg=1.0 - rho_ee)


def husimi_q(state: QubitState, theta, phi):
    """Q = (1/2pi)[cos(theta) rho_ee + sin(theta) Re(e^{i phi} rho_eg) + sin^2(theta/2)]."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    value = _INV_2PI * (
        np.cos(theta) * np.real(state.rho_ee)
        + np.sin(theta) * np.real(np.exp(1j * phi) * state.rho_eg)
        + np.sin(0.5 * theta) ** 2
    )
    return value if np.ndim(value) else float(value)


def husimi_q_overlap(state: QubitState, theta, phi):
    """<theta,phi| rho |theta,phi>/2pi with |theta,phi> = cos(theta/2)|e> + sin(theta/2) e^{i phi}|g>."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta, phi = np.broadcast_arrays(theta, phi)
    coherent = np.stack([np.cos(0.5 * theta) + 0j, np.sin(0.5 * theta) * np.exp(1j * phi)], axis=-1)
    value = _INV_2PI * np.real(np.einsum("...i,ij,...j->...", coherent.conj(), state.matrix, coherent))
    return value if np.ndim(value) else float(value)


@dataclass(frozen=True, eq=False)
class QGrid:
    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray  # shape (n_theta, n_phi), 1/steradian
    normalization: float

    @property
    def peak(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.theta[i]), float(self.phi[j])

    def rows(self):
        for i, theta in enumerate(self.theta):
            for j, phi in enumerate(self.phi):
                yield float(theta), float(phi), float(self.values[i, j])


def _sphere_integral(theta: np.ndarray, phi_count: int, values: np.ndarray) -> float:
    # Periodic rectangle rule in phi is exact for the first harmonic Q carries.
    ring = simpson(values * np.sin(theta)[:, None], x=theta, axis=0)
    return float(np.sum(ring) * 2.0 * math.pi / phi_count)


def husimi_grid(state: QubitState, n_theta: int, n_phi: int) -> QGrid:
    """Q on theta in [0, pi] (endpoints included) x phi in [0, 2pi) (periodic)."""
    if n_theta < MIN_MESH or n_phi < MIN_MESH:
        raise InvalidInputError(f"mesh {n_theta}x{n_phi} too coarse (minimum {MIN_MESH}x{MIN_MESH})")
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    values = husimi_q(state, theta[:, None], phi[None, :])
    return QGrid(theta=theta, phi=phi, values=values, normalization=_sphere_integral(theta, n_phi, values))


def sync_measure(state: QubitState, phi):
    """S(phi) = (rho_eg e^{i phi} + rho_ge e^{-i phi})/8 = Re(e^{i phi} rho_eg)/4."""
    value = 0.25 * np.real(np.exp(1j * np.asarray(phi, dtype=float)) * state.rho_eg)
    return value if np.ndim(value) else float(value)


def sync_measure_integral(state: QubitState, phi, n_nodes: int = THETA_NODES):
    """S from its definition: int_0^pi Q sin(theta) dtheta - 1/2pi (composite Simpson)."""
    if n_nodes < 201:
        raise InvalidInputError("theta quadrature needs at least 201 nodes")
    theta = np.linspace(0.0, math.pi, n_nodes)
    phi = np.asarray(phi, dtype=float)
    integrand = husimi_q(state, theta, phi[..., None]) * np.sin(theta)
    value = simpson(integrand, x=theta, axis=-1) - _INV_2PI
    return value if np.ndim(value) else float(value)


def phase_distribution(state: QubitState, phi):
    """Marginal phase distribution int_0^pi Q sin(theta) dtheta = 1/2pi + S(phi)."""
    value = _INV_2PI + sync_measure(state, phi)
    return value if np.ndim(value) else float(value)
