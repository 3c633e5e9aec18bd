"""Amplitude dynamics of the frequency-modulated qubit in a Lorentzian reservoir.

B(t) obeys  dB/dt + int_0^t K(t, t') B(t') dt' = 0,  B(0) = 1, with

    K(t, t') = (gamma*lambda/2) e^{-lambda (t - t')} F(t) conj(F(t')),
    F(t)     = exp[i (d/Omega) sin(Omega t)].

Two independent routes are provided: product-integration of the memory
integral (solve_volterra) and the equivalent two-component ODE obtained from
the separable kernel (solve_ode). All quantities are in units of gamma.
"""
import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import solve_ivp

from src.services import bessel
from src.services.errors import InvalidInputError, SolverDivergenceError
from src.utils.logger import logger

ODE_METHOD = "DOP853"
ODE_RTOL = 1e-9
ODE_ATOL = 1e-12
CONTRACTIVITY_SLACK = 1e-6
# Lags whose kernel decay falls below this are dropped from the memory sum.
MEMORY_CUTOFF = 1e-17

DEFAULT_DT = 0.005
DRIVE_SAMPLES_DEFAULT = 64
DRIVE_SAMPLES_MIN = 32
KERNEL_DT_FACTOR = 0.05


class SystemParams(BaseModel):
    """Physical configuration, every rate in units of gamma."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    gamma: float = Field(1.0, gt=0)
    lambda_: float = Field(..., gt=0, alias="lambda")
    d: float = Field(0.0, ge=0)
    omega: float = Field(0.0, ge=0)
    # None means "infer": modulation is on whenever omega > 0.
    modulation_on: bool | None = None

    @model_validator(mode="after")
    def _resolve_modulation(self):
        for name in ("gamma", "lambda_", "d", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.modulation_on is None:
            object.__setattr__(self, "modulation_on", self.omega > 0)
        if self.modulation_on and self.omega <= 0:
            raise ValueError("modulation_on requires omega > 0 (d/omega must be finite)")
        return self

    @property
    def ratio(self) -> float:
        """d/Omega, or 0 when the modulation is off."""
        return self.d / self.omega if self.modulation_on else 0.0

    @property
    def coupling(self) -> float:
        return 0.5 * self.gamma * self.lambda_

    def provenance(self) -> dict:
        return {
            "gamma": self.gamma,
            "lambda": self.lambda_,
            "d": self.d,
            "omega": self.omega,
            "modulation_on": self.modulation_on,
            "d_over_omega": self.ratio,
        }


class TimeGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_max: float = Field(..., gt=0)
    n_steps: int = Field(..., ge=2)

    @property
    def dt(self) -> float:
        return self.t_max / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps + 1)

    @classmethod
    def default_for(cls, params: SystemParams, t_max: float) -> "TimeGrid":
        """dt = min(0.005/gamma, (2 pi/Omega)/64) with modulation on."""
        dt = DEFAULT_DT / params.gamma
        if params.modulation_on:
            dt = min(dt, 2.0 * math.pi / params.omega / DRIVE_SAMPLES_DEFAULT)
        return cls(t_max=t_max, n_steps=max(2, math.ceil(t_max / dt - 1e-9)))

    @classmethod
    def for_sampling(cls, params: SystemParams, t_max: float, dt: float) -> "TimeGrid":
        """Output grid near the requested dt, refined just enough to resolve the drive."""
        if params.modulation_on:
            dt = min(dt, 2.0 * math.pi / params.omega / DRIVE_SAMPLES_MIN * 0.99)
        return cls(t_max=t_max, n_steps=max(2, math.ceil(t_max / dt - 1e-9)))

    def resolution_issues(self, params: SystemParams) -> list[str]:
        issues = []
        if params.modulation_on:
            limit = 2.0 * math.pi / params.omega / DRIVE_SAMPLES_MIN
            if self.dt > limit:
                issues.append(f"dt={self.dt:.4g} exceeds drive resolution {limit:.4g} (2pi/Omega/32)")
        limit = KERNEL_DT_FACTOR / params.lambda_
        if self.dt > limit:
            issues.append(f"dt={self.dt:.4g} exceeds kernel resolution {limit:.4g} (0.05/lambda)")
        return issues

    def warn_if_under_resolved(self, params: SystemParams) -> list[str]:
        issues = self.resolution_issues(params)
        for issue in issues:
            logger.warning("Under-resolved time grid: %s", issue)
        return issues

    def provenance(self) -> dict:
        return {"t_max": self.t_max, "n_steps": self.n_steps, "dt": self.dt}


@dataclass(frozen=True, eq=False)
class AmplitudeTrajectory:
    grid: TimeGrid
    values: np.ndarray
    solver: str
    # Reservoir-mode amplitude z(t); only the ODE route tracks it.
    reservoir: np.ndarray | None = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.n_steps + 1,):
            raise InvalidInputError("trajectory length does not match its grid")
        self.values.setflags(write=False)
        if self.reservoir is not None:
            self.reservoir.setflags(write=False)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def is_contractive(self) -> bool:
        return self.max_modulus <= 1.0 + CONTRACTIVITY_SLACK

    def at(self, t: float) -> complex:
        """B at an arbitrary time inside the window (linear interpolation between samples)."""
        if not 0.0 <= t <= self.grid.t_max * (1 + 1e-12):
            raise InvalidInputError(f"time {t!r} outside [0, {self.grid.t_max}]")
        times = self.times
        return complex(np.interp(t, times, self.values.real), np.interp(t, times, self.values.imag))


def modulation_factor(params: SystemParams, t):
    """F(t) = exp[i (d/Omega) sin(Omega t)], identically 1 with modulation off."""
    if not params.modulation_on:
        return np.ones_like(t, dtype=complex) if np.ndim(t) else 1.0 + 0.0j
    phase = params.ratio * np.sin(params.omega * np.asarray(t, dtype=float))
    value = np.exp(1j * phase)
    return value if np.ndim(value) else complex(value)


def _check_ordering(t, t_prime) -> None:
    if np.any(np.asarray(t_prime) > np.asarray(t)) or np.any(np.asarray(t_prime) < 0):
        raise InvalidInputError("kernel requires 0 <= t_prime <= t")


def kernel(params: SystemParams, t, t_prime):
    """K(t, t') = (gamma lambda / 2) e^{-lambda (t-t')} exp[i (d/Omega)(sin Omega t - sin Omega t')]."""
    _check_ordering(t, t_prime)
    lag = np.asarray(t, dtype=float) - np.asarray(t_prime, dtype=float)
    if params.modulation_on:
        phase = params.ratio * (np.sin(params.omega * np.asarray(t)) - np.sin(params.omega * np.asarray(t_prime)))
    else:
        phase = np.zeros_like(lag)
    value = params.coupling * np.exp(-params.lambda_ * lag) * np.exp(1j * phase)
    return value if np.ndim(value) else complex(value)


def kernel_truncated(params: SystemParams, t, t_prime, n_max: int):
    """Kernel with both modulation factors replaced by Jacobi-Anger series truncated at n_max."""
    _check_ordering(t, t_prime)
    lag = np.asarray(t, dtype=float) - np.asarray(t_prime, dtype=float)
    envelope = params.coupling * np.exp(-params.lambda_ * lag)
    if not params.modulation_on:
        value = envelope.astype(complex)
    else:
        a = params.ratio
        forward = bessel.jacobi_anger_series(a, params.omega * np.asarray(t, dtype=float), n_max)
        backward = np.conj(bessel.jacobi_anger_series(a, params.omega * np.asarray(t_prime, dtype=float), n_max))
        value = envelope * forward * backward
    return value if np.ndim(value) else complex(value)


def _check_finite(value: complex, t: float) -> None:
    if not cmath.isfinite(value):
        raise SolverDivergenceError(f"non-finite amplitude at gamma*t={t:.6g}")


def solve_volterra(params: SystemParams, grid: TimeGrid) -> AmplitudeTrajectory:
    """Trapezoidal product integration of the memory integral with an implicit step in B.

    With I_k = dt * sum_j w_j K(t_k, t_j) B_j (trapezoid weights) the outer
    update B_{k+1} = B_k - dt/2 (I_k + I_{k+1}) is solved for B_{k+1} in closed
    form, since the diagonal kernel weight K(t, t) = gamma*lambda/2 is scalar.
    """
    grid.warn_if_under_resolved(params)
    n, dt = grid.n_steps, grid.dt
    times = grid.times
    coupling = params.coupling
    f = np.asarray(modulation_factor(params, times), dtype=complex)
    if f.ndim == 0:
        f = np.full(n + 1, complex(f))
    decay = np.exp(-params.lambda_ * dt * np.arange(n + 1))
    window = n
    if params.lambda_ * dt > 0:
        window = min(n, math.ceil(-math.log(MEMORY_CUTOFF) / (params.lambda_ * dt)))

    b = np.empty(n + 1, dtype=complex)
    g = np.empty(n + 1, dtype=complex)  # conj(F_j) B_j
    b[0] = 1.0
    g[0] = np.conj(f[0])
    memory = 0.0j
    diagonal = 1.0 + 0.25 * dt * dt * coupling

    logger.debug("solve_volterra: n_steps=%d dt=%.3g window=%d", n, dt, window)
    for k in range(1, n + 1):
        lo = max(0, k - window)
        tail = np.dot(decay[k - lo:0:-1], g[lo:k])
        if lo == 0:
            tail -= 0.5 * decay[k] * g[0]
        history = coupling * f[k] * dt * tail
        b[k] = (b[k - 1] - 0.5 * dt * (memory + history)) / diagonal
        _check_finite(b[k], times[k])
        memory = history + 0.5 * dt * coupling * b[k]
        g[k] = np.conj(f[k]) * b[k]

    trajectory = AmplitudeTrajectory(grid=grid, values=b, solver="solve_volterra", stats={"window": window})
    _log_contractivity(trajectory)
    return trajectory


def solve_ode(
    params: SystemParams,
    grid: TimeGrid,
    rtol: float = ODE_RTOL,
    atol: float = ODE_ATOL,
    method: str = ODE_METHOD,
) -> AmplitudeTrajectory:
    """Integrate dB/dt = -(gamma lambda/2) F z, dz/dt = -lambda z + conj(F) B with z(0) = 0.

    z is the memory integral int_0^t e^{-lambda (t-t')} conj(F(t')) B(t') dt',
    so the pair is exactly equivalent to the integro-differential equation.
    """
    grid.warn_if_under_resolved(params)
    coupling = params.coupling
    lam = params.lambda_
    ratio, omega = params.ratio, params.omega
    modulated = params.modulation_on

    def rhs(t, y):
        factor = cmath.exp(1j * ratio * math.sin(omega * t)) if modulated else 1.0
        return np.array([-coupling * factor * y[1], -lam * y[1] + factor.conjugate() * y[0]])

    logger.debug("solve_ode: method=%s rtol=%g atol=%g t_max=%g", method, rtol, atol, grid.t_max)
    times = grid.times
    solution = solve_ivp(
        rhs,
        (0.0, grid.t_max),
        np.array([1.0 + 0.0j, 0.0j]),
        method=method,
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if solution.status != 0:
        raise SolverDivergenceError(f"ODE integration failed: {solution.message}")
    values = np.array(solution.y[0], dtype=complex)
    reservoir = np.array(solution.y[1], dtype=complex)
    if not np.all(np.isfinite(values)):
        raise SolverDivergenceError("non-finite amplitude in ODE solution")
    values[0] = 1.0
    reservoir[0] = 0.0

    trajectory = AmplitudeTrajectory(
        grid=grid,
        values=values,
        solver="solve_ode",
        reservoir=reservoir,
        stats={"method": method, "rtol": rtol, "atol": atol, "nfev": int(solution.nfev)},
    )
    logger.debug("solve_ode finished: nfev=%d", solution.nfev)
    _log_contractivity(trajectory)
    return trajectory


def _log_contractivity(trajectory: AmplitudeTrajectory) -> None:
    if not trajectory.is_contractive:
        logger.warning(
            "%s: |B| reached %.9f > 1 (population gain from vacuum); refine the grid",
            trajectory.solver,
            trajectory.max_modulus,
        )


def analytic_unmodulated(params: SystemParams, t):
    """Closed form for F = 1: B(t) = e^{-lambda t/2}[cosh(Dt/2) + (lambda/D) sinh(Dt/2)].

    D = sqrt(lambda^2 - 2 gamma lambda) (imaginary for lambda < 2 gamma). Evaluated
    as the residue sum ((s1+lambda) e^{s1 t} - (s2+lambda) e^{s2 t})/D with
    s1,2 = (-lambda +- D)/2, which avoids cosh/sinh overflow at late times.
    """
    if params.modulation_on:
        raise InvalidInputError("analytic_unmodulated requires modulation off")
    lam = params.lambda_
    t = np.asarray(t, dtype=float)
    disc = cmath.sqrt(lam * lam - 2.0 * params.gamma * lam)
    if abs(disc) < 1e-12 * lam:
        value = np.exp(-0.5 * lam * t) * (1.0 + 0.5 * lam * t) + 0j
    else:
        s1 = 0.5 * (-lam + disc)
        s2 = 0.5 * (-lam - disc)
        value = ((s1 + lam) * np.exp(s1 * t) - (s2 + lam) * np.exp(s2 * t)) / disc
    return value if np.ndim(value) else complex(value)


def analytic_trajectory(params: SystemParams, grid: TimeGrid) -> AmplitudeTrajectory:
    values = np.asarray(analytic_unmodulated(params, grid.times), dtype=complex)
    values[0] = 1.0
    return AmplitudeTrajectory(grid=grid, values=values, solver="analytic_unmodulated")


def sup_norm_difference(first: AmplitudeTrajectory, second: AmplitudeTrajectory) -> float:
    if first.grid != second.grid:
        raise InvalidInputError("trajectories must share a time grid")
    return float(np.max(np.abs(first.values - second.values)))
