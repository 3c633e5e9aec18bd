"""`simulate`: amplitude B(t) dataset."""
import argparse

from src.handlers.common import (
    add_config_argument,
    add_output_arguments,
    add_verify_argument,
    amplitude_rows,
    load_config,
    output_format,
    resolve_output_dir,
    run_metadata,
)
from src.handlers.errors import EXIT_OK
from src.services import analysis, dynamics
from src.storage import write_dataset
from src.utils.logger import logger

SYNC_COLUMNS = ("gamma_t", "s_value")
AMPLITUDE_COLUMNS = ("gamma_t", "re_b", "im_b", "pop_e")


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="solve for the amplitude B(t)")
    add_config_argument(parser)
    add_output_arguments(parser)
    add_verify_argument(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = load_config(args)
    params = config.system_params()
    grid = config.grid()
    out_dir = resolve_output_dir(args, config)
    fmt = output_format(args, config)

    logger.info("Simulating lambda=%g d=%g omega=%g over gamma*t in [0, %g]", params.lambda_, params.d, params.omega, grid.t_max)
    trajectory = dynamics.solve_ode(params, grid)
    extra = {"contractive": trajectory.is_contractive}
    if "backflow" in config.observables:
        extra["backflow"] = analysis.backflow_intervals(trajectory).summary()
    if args.verify:
        extra["verification"] = analysis.verify_params(params, grid.t_max).summary()

    meta = run_metadata("simulate", config, grid, **extra)
    paths = write_dataset(out_dir, "amplitude", AMPLITUDE_COLUMNS, amplitude_rows(trajectory), meta, fmt)

    if "sync" in config.observables:
        series = analysis.sync_series(params, config.initial_state(), grid, config.phi, trajectory=trajectory)
        sync_meta = run_metadata("simulate", config, grid, phi=config.phi)
        rows = [(float(t), float(s)) for t, s in zip(series.times, series.values)]
        paths += write_dataset(out_dir, "sync", SYNC_COLUMNS, rows, sync_meta, fmt)

    for path in paths:
        logger.info("Wrote %s", path)
    return EXIT_OK
