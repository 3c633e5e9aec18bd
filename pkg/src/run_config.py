"""Flat `key = value` run configuration shared by every CLI command.

Documented keys (rates and times in units of gamma):

    lambda_over_gamma   Lorentzian width (required, > 0)
    d_over_gamma        modulation amplitude (>= 0, default 0)
    omega_over_gamma    modulation frequency (>= 0, default 0)
    modulation_on       true/false; inferred as omega_over_gamma > 0 when absent
    t_max_gamma         simulated window (default 10)
    n_steps             uniform steps; default dt = min(0.005, (2pi/Omega)/64)
    phi                 phase at which S(phi, t) is reported (default 0)
    c_e_re, c_e_im, c_g_re, c_g_im
                        initial amplitudes, or the polar form
    c_e_abs, c_e_arg, c_g_abs, c_g_arg
                        (default: equal real superposition; the figures never
                        state their initial amplitudes, the phi = 0 preference
                        they show implies real positive c_e conj(c_g))
    output_format       csv | json
    output_dir          dataset directory (overridden by --out)
    observables         comma list of amplitude, sync, backflow
    sync_epsilon        phase-locking threshold for sync lifetimes
    n_theta, n_phi      Husimi mesh size
    snapshot_times      comma list of gamma*t values for Q snapshots
    sweep_variable      omega | d | ratio
    sweep_values        comma list of settings
    sweep_ratio_lock    forces d = ratio * Omega in omega sweeps
    sweep_observable    sync-series | q-grid-snapshots | amplitude
"""
import io
from pathlib import Path
from typing import Literal

from dotenv.parser import parse_stream
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.services.analysis import GridSpec, SweepSpec
from src.services.dynamics import SystemParams, TimeGrid
from src.services.errors import ConfigError, InvalidInputError
from src.services.state import InitialState

RECT_KEYS = ("c_e_re", "c_e_im", "c_g_re", "c_g_im")
POLAR_KEYS = ("c_e_abs", "c_e_arg", "c_g_abs", "c_g_arg")
LIST_KEYS = ("observables", "snapshot_times", "sweep_values")
OBSERVABLES = ("amplitude", "sync", "backflow")


class CrossFieldError(ValueError):
    """Validation failure spanning several keys; reported on the earliest line among `keys`."""

    def __init__(self, message: str, keys: tuple[str, ...]):
        super().__init__(message)
        self.keys = keys


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    lambda_over_gamma: float = Field(..., gt=0)
    d_over_gamma: float = Field(0.0, ge=0)
    omega_over_gamma: float = Field(0.0, ge=0)
    modulation_on: bool | None = None
    t_max_gamma: float = Field(10.0, gt=0)
    n_steps: int | None = Field(None, ge=2)
    phi: float = 0.0
    c_e_re: float | None = None
    c_e_im: float | None = None
    c_g_re: float | None = None
    c_g_im: float | None = None
    c_e_abs: float | None = Field(None, ge=0)
    c_e_arg: float | None = None
    c_g_abs: float | None = Field(None, ge=0)
    c_g_arg: float | None = None
    output_format: Literal["csv", "json"] = "csv"
    output_dir: str | None = None
    observables: list[str] = Field(default_factory=lambda: ["amplitude"], min_length=1)
    sync_epsilon: float | None = Field(None, gt=0)
    n_theta: int = Field(91, ge=8)
    n_phi: int = Field(120, ge=8)
    snapshot_times: list[float] = Field(default_factory=list)
    sweep_variable: Literal["omega", "d", "ratio"] | None = None
    sweep_values: list[float] = Field(default_factory=list)
    sweep_ratio_lock: float | None = Field(None, gt=0)
    sweep_observable: Literal["sync-series", "q-grid-snapshots", "amplitude"] = "sync-series"

    @field_validator(*LIST_KEYS, mode="before")
    @classmethod
    def split_list(cls, value):
        if isinstance(value, str):
            return [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("observables")
    @classmethod
    def known_observables(cls, value: list[str]) -> list[str]:
        unknown = [v for v in value if v not in OBSERVABLES]
        if unknown:
            raise ValueError(f"unknown observables {unknown}; choose from {', '.join(OBSERVABLES)}")
        return value

    @model_validator(mode="after")
    def one_amplitude_form(self):
        rect = any(getattr(self, key) is not None for key in RECT_KEYS)
        polar = any(getattr(self, key) is not None for key in POLAR_KEYS)
        if rect and polar:
            raise CrossFieldError("give initial amplitudes either as re/im or as abs/arg, not both", RECT_KEYS + POLAR_KEYS)
        # Surfaces normalization and modulation errors at parse time.
        try:
            self.initial_state()
        except InvalidInputError as exc:
            raise CrossFieldError(str(exc), RECT_KEYS + POLAR_KEYS) from exc
        try:
            self.system_params()
        except ValidationError as exc:
            message = exc.errors()[0]["msg"].removeprefix("Value error, ")
            raise CrossFieldError(message, ("modulation_on",)) from exc
        return self

    def system_params(self) -> SystemParams:
        return SystemParams(
            lambda_=self.lambda_over_gamma,
            d=self.d_over_gamma,
            omega=self.omega_over_gamma,
            modulation_on=self.modulation_on,
        )

    def initial_state(self) -> InitialState:
        if any(getattr(self, key) is not None for key in POLAR_KEYS):
            return InitialState.from_polar(
                self.c_g_abs or 0.0, self.c_g_arg or 0.0, self.c_e_abs or 0.0, self.c_e_arg or 0.0
            )
        if any(getattr(self, key) is not None for key in RECT_KEYS):
            return InitialState(
                c_g=complex(self.c_g_re or 0.0, self.c_g_im or 0.0),
                c_e=complex(self.c_e_re or 0.0, self.c_e_im or 0.0),
            )
        return InitialState.equal_superposition()

    def grid(self) -> TimeGrid:
        return self.grid_spec().resolve(self.system_params())

    def grid_spec(self) -> GridSpec:
        return GridSpec(t_max=self.t_max_gamma, n_steps=self.n_steps)

    def sweep_spec(self) -> SweepSpec:
        if self.sweep_variable is None or not self.sweep_values:
            raise ConfigError("sweep needs sweep_variable and sweep_values")
        return SweepSpec(
            base=self.system_params(),
            variable=self.sweep_variable,
            values=self.sweep_values,
            ratio_lock=self.sweep_ratio_lock,
            observable=self.sweep_observable,
            phi=self.phi,
            snapshot_times=self.snapshot_times,
            n_theta=self.n_theta,
            n_phi=self.n_phi,
        )

    def to_mapping(self) -> dict:
        """Explicitly set values only, in declaration order (None means 'not given')."""
        return {key: value for key, value in self.model_dump().items() if value is not None}


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        # Items are numbers or observable names; neither needs quoting.
        return ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        # Unquoted values lose everything after ' #'.
        escaped = value.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{escaped}'"
    return str(value)


def serialize_run_config(config: RunConfig) -> str:
    lines = ["# fmqsync run configuration"]
    for key, value in config.to_mapping().items():
        if isinstance(value, list) and not value:
            continue
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def parse_run_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse `key = value` lines; every failure names the offending line."""
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for binding in parse_stream(io.StringIO(text)):
        # Blank lines are folded into the following binding.
        raw = binding.original.string
        line = binding.original.line + raw[: len(raw) - len(raw.lstrip())].count("\n")
        if binding.error:
            snippet = binding.original.string.strip()
            raise ConfigError(f"cannot parse {snippet!r}; expected 'key = value'", source, line)
        if binding.key is None:
            continue
        key = binding.key.strip().lower()
        if binding.value is None:
            raise ConfigError(f"key {key!r} has no value", source, line)
        if key not in RunConfig.model_fields:
            raise ConfigError(f"unknown key {key!r}", source, line)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", source, line)
        values[key] = binding.value
        lines[key] = line

    try:
        return RunConfig.model_validate(values)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = str(error["loc"][0]) if error["loc"] else ""
        cause = error.get("ctx", {}).get("error")
        if not field and isinstance(cause, CrossFieldError):
            given = [key for key in cause.keys if key in lines]
            if given:
                field = min(given, key=lines.get)
        message = error["msg"].removeprefix("Value error, ")
        if field:
            message = f"{field}: {message}"
        raise ConfigError(message, source, lines.get(field)) from exc


def load_run_config(path: Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}", str(path)) from exc
    return parse_run_config(text, str(path))
