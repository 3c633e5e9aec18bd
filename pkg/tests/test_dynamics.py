import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.services import bessel, dynamics
from src.services.dynamics import SystemParams, TimeGrid
from src.services.errors import InvalidInputError
from tests.conftest import grid


def modulated(lam: float, d: float, omega: float) -> SystemParams:
    return SystemParams(lambda_=lam, d=d, omega=omega)


# --- parameters and grids ----------------------------------------------------


def test_modulation_is_inferred_from_omega():
    assert SystemParams(lambda_=1.0).modulation_on is False
    assert SystemParams(lambda_=1.0, d=2.0, omega=0.5).modulation_on is True
    assert SystemParams(lambda_=1.0, d=2.0, omega=0.5, modulation_on=False).ratio == 0.0


def test_lambda_alias_and_provenance():
    params = SystemParams.model_validate({"lambda": 0.01, "d": 5.0, "omega": 0.9})
    record = params.provenance()
    assert record["lambda"] == 0.01
    assert record["d_over_omega"] == pytest.approx(5.0 / 0.9)


@pytest.mark.parametrize(
    "fields",
    [
        {"lambda_": 0.0},
        {"lambda_": -1.0},
        {"lambda_": 1.0, "d": -0.5},
        {"lambda_": 1.0, "omega": 0.0, "modulation_on": True},
        {"lambda_": math.nan},
        {"lambda_": 1.0, "d": math.inf},
    ],
)
def test_invalid_params_are_rejected(fields):
    with pytest.raises(ValidationError):
        SystemParams(**fields)


def test_default_grid_rule():
    assert TimeGrid.default_for(SystemParams(lambda_=3.0), 10.0).dt == pytest.approx(0.005)
    fast = TimeGrid.default_for(modulated(0.01, 120.0, 50.0), 1.0)
    assert fast.dt <= 2 * math.pi / 50.0 / 64 + 1e-15


def test_grid_validation():
    with pytest.raises(ValidationError):
        TimeGrid(t_max=0.0, n_steps=10)
    with pytest.raises(ValidationError):
        TimeGrid(t_max=1.0, n_steps=1)


def test_under_resolved_grid_warns(caplog):
    params = modulated(3.0, 10.0, 100.0)
    coarse = TimeGrid(t_max=1.0, n_steps=20)
    assert len(coarse.resolution_issues(params)) == 2
    with caplog.at_level(logging.WARNING, logger="fmqsync"):
        trajectory = dynamics.solve_ode(params, coarse)
    assert trajectory.values[0] == 1.0
    assert any("Under-resolved" in record.message for record in caplog.records)


def test_resolved_grid_is_quiet():
    params = modulated(0.01, 5.0, 0.9)
    assert TimeGrid.default_for(params, 10.0).resolution_issues(params) == []


# --- kernel -----------------------------------------------------------------


def test_modulation_factor_examples():
    off = SystemParams(lambda_=1.0)
    assert dynamics.modulation_factor(off, 3.7) == 1.0
    ratio = 2.40483
    params = modulated(1.0, ratio * 2.0, 2.0)
    assert dynamics.modulation_factor(params, 0.0) == pytest.approx(1.0)
    t = math.pi / 2 / params.omega
    assert dynamics.modulation_factor(params, t) == pytest.approx(np.exp(1j * ratio), abs=1e-12)
    values = dynamics.modulation_factor(params, np.linspace(0, 20, 101))
    assert np.allclose(np.abs(values), 1.0)


def test_kernel_examples():
    params = SystemParams(lambda_=3.0)
    assert dynamics.kernel(params, 2.0, 2.0) == pytest.approx(1.5)
    assert dynamics.kernel(params, 2.0, 1.0) == pytest.approx(1.5 * math.exp(-3.0))


def test_kernel_is_separable(rng):
    params = modulated(0.3, 4.0, 1.7)
    t = rng.uniform(0, 50, 200)
    t_prime = t * rng.uniform(0, 1, 200)
    exact = dynamics.kernel(params, t, t_prime)
    f = dynamics.modulation_factor
    split = params.coupling * np.exp(-params.lambda_ * (t - t_prime)) * f(params, t) * np.conj(f(params, t_prime))
    assert np.max(np.abs(exact - split)) < 1e-14


def test_kernel_rejects_reversed_times():
    with pytest.raises(InvalidInputError):
        dynamics.kernel(SystemParams(lambda_=1.0), 1.0, 2.0)
    with pytest.raises(InvalidInputError):
        dynamics.kernel_truncated(SystemParams(lambda_=1.0), 1.0, 2.0, 3)


def test_truncated_kernel_vanishes_on_j0_zero():
    omega = 2.0
    params = modulated(0.5, bessel.jn_zero(0, 1) * omega, omega)
    value = dynamics.kernel_truncated(params, 3.0, 1.0, 0)
    assert abs(value) < 1e-12


def test_truncated_kernel_is_exact_without_modulation():
    params = SystemParams(lambda_=0.5)
    assert dynamics.kernel_truncated(params, 3.0, 1.0, 0) == pytest.approx(dynamics.kernel(params, 3.0, 1.0))


def test_truncated_kernel_converges(rng):
    params = modulated(0.5, 5.0, 1.0)
    t = rng.uniform(0, 30, 50)
    t_prime = t * rng.uniform(0, 1, 50)
    gap = np.abs(dynamics.kernel_truncated(params, t, t_prime, 40) - dynamics.kernel(params, t, t_prime))
    assert np.max(gap) < 1e-8


# --- solvers ----------------------------------------------------------------


def test_analytic_closed_form_examples():
    params = SystemParams(lambda_=3.0)
    assert dynamics.analytic_unmodulated(params, 0.0) == pytest.approx(1.0)
    d = math.sqrt(3.0)
    expected = math.exp(-1.5) * (math.cosh(d / 2) + 3.0 / d * math.sinh(d / 2))
    assert dynamics.analytic_unmodulated(params, 1.0) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(InvalidInputError):
        dynamics.analytic_unmodulated(modulated(1.0, 1.0, 1.0), 1.0)


def test_analytic_strong_coupling_oscillates():
    params = SystemParams(lambda_=0.01)
    t = np.linspace(0, 200, 4001)
    population = np.abs(dynamics.analytic_unmodulated(params, t)) ** 2
    # B = e^{-lambda t/2}[cos wt + (lambda/2w) sin wt]; its first zero is the first minimum of |B|^2.
    w = math.sqrt(2 * 0.01 - 0.01**2) / 2
    first_zero = (math.pi - math.atan(2 * w / 0.01)) / w
    first_min = t[np.argmin(population[t < 60])]
    assert first_min == pytest.approx(first_zero, abs=0.1)
    assert np.any(np.diff(population) > 0)


@pytest.mark.parametrize("solver", [dynamics.solve_ode, dynamics.solve_volterra])
def test_solvers_match_analytic_oracle(weak, solver):
    fine = TimeGrid(t_max=10.0, n_steps=5000)
    trajectory = solver(weak, fine)
    oracle = dynamics.analytic_trajectory(weak, fine)
    assert trajectory.values[0] == 1.0
    assert dynamics.sup_norm_difference(trajectory, oracle) < 1e-5


@pytest.mark.parametrize(
    ("lam", "d", "omega", "dt"),
    [(0.01, 5.0, 0.9, 0.005), (0.01, 5.0, 2.1, 0.005), (3.0, 10.0, 1.0, 0.0025), (0.01, 2.40483 * 2.0, 2.0, 0.005)],
)
def test_dual_solver_equivalence(lam, d, omega, dt):
    params = modulated(lam, d, omega)
    shared = grid(100.0, dt)
    ode = dynamics.solve_ode(params, shared)
    volterra = dynamics.solve_volterra(params, shared)
    assert dynamics.sup_norm_difference(ode, volterra) <= 1e-4
    assert ode.is_contractive and volterra.is_contractive


def test_volterra_is_second_order():
    params = modulated(0.01, 5.0, 0.9)
    errors = []
    for n_steps in (1000, 2000):
        shared = TimeGrid(t_max=20.0, n_steps=n_steps)
        reference = dynamics.solve_ode(params, shared, rtol=1e-12, atol=1e-14)
        errors.append(dynamics.sup_norm_difference(dynamics.solve_volterra(params, shared), reference))
    assert 3.5 <= errors[0] / errors[1] <= 4.5


def test_weak_coupling_decays_monotonically(weak):
    trajectory = dynamics.solve_ode(weak, grid(10.0, 0.01))
    assert np.all(np.diff(trajectory.populations) <= 1e-12)
    assert trajectory.populations[-1] < 1e-4


def test_reservoir_amplitude_starts_empty(strong):
    trajectory = dynamics.solve_ode(strong, grid(5.0, 0.01))
    assert trajectory.reservoir[0] == 0.0
    assert trajectory.solver == "solve_ode"
    assert trajectory.stats["method"] == dynamics.ODE_METHOD


def test_trajectory_is_immutable(strong):
    trajectory = dynamics.solve_ode(strong, grid(1.0, 0.01))
    with pytest.raises(ValueError):
        trajectory.values[3] = 0.5


def test_trajectory_interpolates_between_samples(weak):
    shared = grid(2.0, 0.01)
    trajectory = dynamics.analytic_trajectory(weak, shared)
    assert trajectory.at(0.0) == 1.0
    assert trajectory.at(1.005) == pytest.approx(dynamics.analytic_unmodulated(weak, 1.005), abs=1e-5)
    with pytest.raises(InvalidInputError):
        trajectory.at(2.5)


def test_j0_zero_decouples_at_high_frequency():
    omega = 50.0
    tuned = modulated(0.01, bessel.jn_zero(0, 1) * omega, omega)
    plain = modulated(0.01, 5.0, omega)
    sampling = TimeGrid.for_sampling(tuned, 100.0, 0.05)
    assert abs(dynamics.solve_ode(tuned, sampling).values[-1]) > 0.9
    assert abs(dynamics.solve_ode(plain, TimeGrid.for_sampling(plain, 100.0, 0.05)).values[-1]) < 0.5


@pytest.mark.slow
def test_decoupling_improves_with_frequency_on_j0_zero():
    ratio = bessel.jn_zero(0, 1)
    minima = []
    for omega in (0.05, 0.5, 5.0, 50.0):
        params = modulated(0.01, ratio * omega, omega)
        trajectory = dynamics.solve_ode(params, TimeGrid.for_sampling(params, 100.0, 0.05))
        minima.append(float(np.min(np.abs(trajectory.values))))
    assert minima == sorted(minima)
