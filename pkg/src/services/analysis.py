"""Synchronization time series, non-Markovian witnesses and parameter sweeps."""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from scipy.signal import find_peaks

from src.config import get_settings
from src.services import bessel, dynamics, state
from src.services.dynamics import AmplitudeTrajectory, SystemParams, TimeGrid
from src.services.errors import InvalidInputError, SimulationError
from src.services.state import InitialState, QGrid
from src.utils.logger import logger

BACKFLOW_TOLERANCE = 1e-10
ENVELOPE_SAMPLES = 11
SAME_RESULT_TOLERANCE = 0.05


@dataclass(frozen=True, eq=False)
class SyncSeries:
    phi: float
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.n_steps + 1,):
            raise InvalidInputError("series length does not match its grid")
        if np.max(np.abs(self.values)) > state.SYNC_BOUND + 1e-9:
            raise InvalidInputError("|S| exceeds 1/8")
        self.values.setflags(write=False)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


@dataclass(frozen=True)
class BackflowReport:
    intervals: tuple[tuple[float, float], ...]
    total_backflow: float

    @property
    def count(self) -> int:
        return len(self.intervals)

    def summary(self) -> dict:
        return {
            "intervals": [list(interval) for interval in self.intervals],
            "count": self.count,
            "total_backflow": self.total_backflow,
        }


def sync_series(
    params: SystemParams,
    init: InitialState,
    grid: TimeGrid,
    phi: float,
    trajectory: AmplitudeTrajectory | None = None,
) -> SyncSeries:
    """S(phi, t) on the grid, from the solve_ode amplitude unless one is supplied."""
    if trajectory is None:
        trajectory = dynamics.solve_ode(params, grid)
    values = np.array(
        [state.sync_measure(state.density_matrix(init, b), phi) for b in trajectory.values],
        dtype=float,
    )
    return SyncSeries(phi=float(phi), grid=grid, values=values)


def sync_lifetime(series: SyncSeries, epsilon: float | None = None) -> float:
    """Last time |S| >= epsilon, with the final crossing located by linear interpolation."""
    if epsilon is None:
        epsilon = get_settings().sync_epsilon
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    magnitude = np.abs(series.values)
    above = np.flatnonzero(magnitude >= epsilon)
    if above.size == 0:
        return 0.0
    times = series.times
    last = int(above[-1])
    if last == magnitude.size - 1:
        return float(times[last])
    s0, s1 = magnitude[last], magnitude[last + 1]
    fraction = (s0 - epsilon) / (s0 - s1)
    return float(times[last] + fraction * (times[last + 1] - times[last]))


def sync_envelope(series: SyncSeries) -> np.ndarray:
    """Local maxima of |S| (endpoints included) joined by linear interpolation."""
    magnitude = np.abs(series.values)
    peaks, _ = find_peaks(magnitude)
    anchors = np.unique(np.concatenate(([0], peaks, [magnitude.size - 1])))
    return np.interp(series.times, series.times[anchors], magnitude[anchors])


def envelope_relative_difference(first: SyncSeries, second: SyncSeries) -> float:
    if first.grid != second.grid:
        raise InvalidInputError("series must share a time grid")
    a, b = sync_envelope(first), sync_envelope(second)
    scale = max(float(np.max(a)), float(np.max(b)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - b)) / scale)


def envelope_samples(series: SyncSeries, count: int = ENVELOPE_SAMPLES) -> list[tuple[float, float]]:
    envelope = sync_envelope(series)
    picks = np.linspace(0, envelope.size - 1, count).round().astype(int)
    return [(float(series.times[i]), float(envelope[i])) for i in picks]


def backflow_intervals(traj: AmplitudeTrajectory, tolerance: float = BACKFLOW_TOLERANCE) -> BackflowReport:
    """Intervals where |B|^2 grows, with a +-tolerance hysteresis band against jitter."""
    if traj.values.size < 3:
        raise InvalidInputError("backflow analysis needs at least 3 samples")
    times = traj.times
    steps = np.diff(traj.populations)

    intervals: list[tuple[float, float]] = []
    total = 0.0
    rising = False
    start = 0
    for i, step in enumerate(steps):
        if not rising and step > tolerance:
            rising, start = True, i
        elif rising and step < -tolerance:
            rising = False
            intervals.append((float(times[start]), float(times[i])))
        if rising and step > 0:
            total += float(step)
    if rising:
        intervals.append((float(times[start]), float(times[-1])))
    return BackflowReport(intervals=tuple(intervals), total_backflow=total)


# --- sweeps -----------------------------------------------------------------

SweepVariable = Literal["omega", "d", "ratio"]
Observable = Literal["sync-series", "q-grid-snapshots", "amplitude"]


class GridSpec(BaseModel):
    """Grid request resolved per sweep row, so bad grids surface as row errors."""

    model_config = ConfigDict(frozen=True)

    t_max: float
    n_steps: int | None = None

    def resolve(self, params: SystemParams) -> TimeGrid:
        if self.n_steps is None:
            return TimeGrid.default_for(params, self.t_max)
        return TimeGrid(t_max=self.t_max, n_steps=self.n_steps)


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    base: SystemParams
    variable: SweepVariable
    values: list[float] = Field(..., min_length=1)
    ratio_lock: float | None = Field(None, gt=0)
    observable: Observable = "sync-series"
    phi: float = 0.0
    snapshot_times: list[float] = Field(default_factory=list)
    n_theta: int = 91
    n_phi: int = 90

    @field_validator("values")
    @classmethod
    def non_negative(cls, values: list[float]) -> list[float]:
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ValueError("sweep values must be finite and >= 0")
        return values

    @model_validator(mode="after")
    def ratio_lock_needs_omega(self):
        if self.ratio_lock is not None and self.variable != "omega":
            raise ValueError("ratio_lock applies only to omega sweeps")
        return self

    def row_params(self, value: float) -> SystemParams:
        fields = self.base.model_dump()
        if self.variable == "omega":
            fields["omega"] = value
            fields["modulation_on"] = value > 0
            if self.ratio_lock is not None:
                fields["d"] = self.ratio_lock * value
        elif self.variable == "d":
            fields["d"] = value
        else:
            fields["d"] = value * fields["omega"]
        return SystemParams.model_validate(fields)


@dataclass(frozen=True, eq=False)
class SweepRow:
    index: int
    value: float
    params: SystemParams | None = None
    grid: TimeGrid | None = None
    trajectory: AmplitudeTrajectory | None = None
    series: SyncSeries | None = None
    snapshots: tuple[tuple[float, QGrid], ...] = ()
    lifetime: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def record(self) -> dict:
        entry = {"index": self.index, "value": self.value, "error": self.error}
        if self.params is not None:
            entry["params"] = self.params.provenance()
        if self.grid is not None:
            entry["grid"] = self.grid.provenance()
        if self.lifetime is not None:
            entry["sync_lifetime"] = self.lifetime
        if self.trajectory is not None:
            entry["final_population"] = float(self.trajectory.populations[-1])
        if self.snapshots:
            entry["snapshots"] = [{"t": t, "normalization": q.normalization} for t, q in self.snapshots]
        return entry


@dataclass(frozen=True, eq=False)
class SweepTable:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]
    verification: tuple["VerificationRecord", ...] = field(default=())

    def summary_records(self) -> list[dict]:
        return [row.record() for row in self.rows]


def _run_row(spec: SweepSpec, init: InitialState, grid_spec: GridSpec, index: int, value: float) -> SweepRow:
    try:
        params = spec.row_params(value)
        grid = grid_spec.resolve(params)
    except (ValidationError, InvalidInputError) as exc:
        logger.warning("Sweep row %d (%s=%s) rejected: %s", index, spec.variable, value, exc)
        return SweepRow(index=index, value=value, error=f"validation: {exc}")

    try:
        trajectory = dynamics.solve_ode(params, grid)
        if spec.observable == "amplitude":
            return SweepRow(index=index, value=value, params=params, grid=grid, trajectory=trajectory)
        if spec.observable == "sync-series":
            series = sync_series(params, init, grid, spec.phi, trajectory=trajectory)
            return SweepRow(
                index=index,
                value=value,
                params=params,
                grid=grid,
                trajectory=trajectory,
                series=series,
                lifetime=sync_lifetime(series),
            )
        times = spec.snapshot_times or [grid.t_max]
        snapshots = tuple(
            (float(t), state.husimi_grid(state.density_matrix(init, trajectory.at(t)), spec.n_theta, spec.n_phi))
            for t in times
        )
        return SweepRow(index=index, value=value, params=params, grid=grid, trajectory=trajectory, snapshots=snapshots)
    except SimulationError as exc:
        logger.warning("Sweep row %d (%s=%s) failed: %s", index, spec.variable, value, exc)
        return SweepRow(index=index, value=value, params=params, grid=grid, error=f"{type(exc).__name__}: {exc}")


def run_sweep(
    spec: SweepSpec,
    init: InitialState,
    grid: GridSpec | TimeGrid,
    max_workers: int | None = None,
) -> SweepTable:
    """One record per sweep value, in input order; row failures do not abort the sweep."""
    if isinstance(grid, TimeGrid):
        grid = GridSpec(t_max=grid.t_max, n_steps=grid.n_steps)
    if max_workers is None:
        max_workers = get_settings().max_workers
    logger.info(
        "Sweep over %s: %d rows, observable=%s, workers=%d",
        spec.variable,
        len(spec.values),
        spec.observable,
        max_workers,
    )
    jobs = list(enumerate(spec.values))
    if max_workers <= 1 or len(jobs) <= 1:
        rows = [_run_row(spec, init, grid, i, v) for i, v in jobs]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(_run_row, spec, init, grid, i, v) for i, v in jobs]
            rows = [future.result() for future in futures]
    failed = sum(1 for row in rows if not row.ok)
    if failed:
        logger.warning("Sweep finished with %d failed row(s) of %d", failed, len(rows))
    return SweepTable(spec=spec, rows=tuple(rows))


@dataclass(frozen=True)
class VerificationRecord:
    index: int
    n_steps: int
    discrepancy: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tolerance

    def summary(self) -> dict:
        return {
            "index": self.index,
            "n_steps": self.n_steps,
            "discrepancy": self.discrepancy,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def verification_indices(count: int, max_rows: int) -> list[int]:
    if count <= max_rows:
        return list(range(count))
    return sorted({round(i * (count - 1) / (max_rows - 1)) for i in range(max_rows)}) if max_rows > 1 else [0]


def verify_params(params: SystemParams, t_max: float, index: int = 0, tolerance: float | None = None) -> VerificationRecord:
    """Cross-check solve_ode against solve_volterra on the default fine grid."""
    if tolerance is None:
        tolerance = get_settings().verify_tolerance
    grid = TimeGrid.default_for(params, t_max)
    reference = dynamics.solve_ode(params, grid)
    oracle = dynamics.solve_volterra(params, grid)
    discrepancy = dynamics.sup_norm_difference(reference, oracle)
    record = VerificationRecord(index=index, n_steps=grid.n_steps, discrepancy=discrepancy, tolerance=tolerance)
    log = logger.info if record.passed else logger.warning
    log("Verification row %d: sup|B_ode - B_volterra| = %.3e (tolerance %.1e)", index, discrepancy, tolerance)
    return record


def verify_rows(table: SweepTable, max_rows: int | None = None) -> SweepTable:
    settings = get_settings()
    if max_rows is None:
        max_rows = settings.verify_max_rows
    candidates = [row for row in table.rows if row.ok]
    records = []
    for position in verification_indices(len(candidates), max_rows):
        row = candidates[position]
        records.append(verify_params(row.params, row.grid.t_max, index=row.index, tolerance=settings.verify_tolerance))
    return SweepTable(spec=table.spec, rows=table.rows, verification=tuple(records))


# --- Bessel-zero tuning -------------------------------------------------------


@dataclass(frozen=True)
class ZeroComparisonRow:
    zero_index: int
    d_over_omega: float
    d: float
    omega: float
    lifetime: float | None
    envelope: tuple[tuple[float, float], ...]
    error: str | None = None

    def summary(self) -> dict:
        return {
            "zero_index": self.zero_index,
            "d_over_omega": self.d_over_omega,
            "d": self.d,
            "omega": self.omega,
            "sync_lifetime": self.lifetime,
            "envelope": [list(point) for point in self.envelope],
            "error": self.error,
        }


def bessel_zero_comparison(
    base: SystemParams,
    zero_indices: list[int],
    init: InitialState,
    grid: GridSpec | TimeGrid,
    phi: float = 0.0,
) -> list[ZeroComparisonRow]:
    """Tune d/Omega onto successive zeros of J_0 at fixed Omega and compare sync lifetimes."""
    if not zero_indices or any(k < 1 for k in zero_indices):
        raise InvalidInputError("zero indices must be >= 1")
    if base.omega <= 0:
        raise InvalidInputError("Bessel-zero tuning needs a fixed Omega > 0")
    ratios = [bessel.jn_zero(0, k) for k in zero_indices]
    spec = SweepSpec(base=base, variable="ratio", values=ratios, observable="sync-series", phi=phi)
    table = run_sweep(spec, init, grid)
    comparison = []
    for k, ratio, row in zip(zero_indices, ratios, table.rows):
        if not row.ok:
            comparison.append(
                ZeroComparisonRow(
                    zero_index=k, d_over_omega=ratio, d=ratio * base.omega, omega=base.omega,
                    lifetime=None, envelope=(), error=row.error,
                )
            )
            continue
        comparison.append(
            ZeroComparisonRow(
                zero_index=k,
                d_over_omega=ratio,
                d=row.params.d,
                omega=row.params.omega,
                lifetime=row.lifetime,
                envelope=tuple(envelope_samples(row.series)),
            )
        )
    return comparison


def same_result(first: SyncSeries, second: SyncSeries, tolerance: float = SAME_RESULT_TOLERANCE) -> bool:
    """Envelopes agree within the relative tolerance (5% by default)."""
    return envelope_relative_difference(first, second) <= tolerance
