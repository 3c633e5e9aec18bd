import argparse
from pathlib import Path

from src.config import get_settings
from src.run_config import RunConfig, load_run_config, serialize_run_config
from src.services.dynamics import ODE_ATOL, ODE_METHOD, ODE_RTOL, AmplitudeTrajectory, TimeGrid
from src.services.errors import InvalidInputError
from src.storage import ensure_output_dir, metadata
from src.utils.logger import logger

SOLVER_INFO = {"name": "solve_ode", "method": ODE_METHOD, "rtol": ODE_RTOL, "atol": ODE_ATOL}


def add_config_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, type=Path, help="key = value run configuration")


def add_output_arguments(parser: argparse.ArgumentParser, formats: bool = True) -> None:
    parser.add_argument("--out", type=Path, default=None, help="output directory (default: FMQSYNC_OUTPUT_DIR)")
    if formats:
        parser.add_argument("--format", choices=("csv", "json"), default=None, help="dataset format")


def add_verify_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--verify",
        action="store_true",
        help="cross-check solve_ode against the independent Volterra solver",
    )


def load_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config)
    logger.info("Loaded run configuration from %s", args.config)
    return config


def resolve_output_dir(args: argparse.Namespace, config: RunConfig | None = None) -> Path:
    """--out, then the config's output_dir, then FMQSYNC_OUTPUT_DIR."""
    if getattr(args, "out", None) is not None:
        target = args.out
    elif config is not None and config.output_dir:
        target = Path(config.output_dir)
    else:
        target = get_settings().output_dir
    try:
        return ensure_output_dir(Path(target))
    except OSError as exc:
        raise InvalidInputError(f"output directory {target} is not usable: {exc}") from exc


def output_format(args: argparse.Namespace, config: RunConfig) -> str:
    return getattr(args, "format", None) or config.output_format


def run_metadata(command: str, config: RunConfig, grid: TimeGrid, **extra) -> dict:
    """Sidecar sufficient to re-run the producing command."""
    init = config.initial_state()
    return metadata(
        command,
        params=config.system_params().provenance(),
        initial={
            "c_g": [init.c_g.real, init.c_g.imag],
            "c_e": [init.c_e.real, init.c_e.imag],
        },
        grid=grid.provenance(),
        solver=SOLVER_INFO,
        config=config.to_mapping(),
        config_text=serialize_run_config(config),
        **extra,
    )


def amplitude_rows(trajectory: AmplitudeTrajectory) -> list[tuple[float, float, float, float]]:
    populations = trajectory.populations
    return [
        (float(t), float(b.real), float(b.imag), float(p))
        for t, b, p in zip(trajectory.times, trajectory.values, populations)
    ]
