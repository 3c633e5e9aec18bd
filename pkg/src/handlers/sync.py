"""`sync`: S(phi, t) dataset with lifetime and backflow summary."""
import argparse

from src.config import get_settings
from src.handlers.common import (
    add_config_argument,
    add_output_arguments,
    add_verify_argument,
    load_config,
    output_format,
    resolve_output_dir,
    run_metadata,
)
from src.handlers.errors import EXIT_OK
from src.handlers.simulate import SYNC_COLUMNS
from src.services import analysis, dynamics
from src.storage import write_dataset
from src.utils.formatters import format_lifetime
from src.utils.logger import logger


def register(subparsers) -> None:
    parser = subparsers.add_parser("sync", help="synchronization measure S(phi, t)")
    add_config_argument(parser)
    add_output_arguments(parser)
    add_verify_argument(parser)
    parser.add_argument("--phi", type=float, default=None, help="phase (default: config phi)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = load_config(args)
    params = config.system_params()
    grid = config.grid()
    phi = config.phi if args.phi is None else args.phi
    out_dir = resolve_output_dir(args, config)

    trajectory = dynamics.solve_ode(params, grid)
    series = analysis.sync_series(params, config.initial_state(), grid, phi, trajectory=trajectory)
    lifetime = analysis.sync_lifetime(series, config.sync_epsilon)
    backflow = analysis.backflow_intervals(trajectory)
    logger.info("S(%g, t): lifetime %s, %d backflow interval(s)", phi, format_lifetime(lifetime), backflow.count)

    extra = {
        "phi": phi,
        "sync_epsilon": config.sync_epsilon or get_settings().sync_epsilon,
        "sync_lifetime": lifetime,
        "backflow": backflow.summary(),
    }
    if args.verify:
        extra["verification"] = analysis.verify_params(params, grid.t_max).summary()
    meta = run_metadata("sync", config, grid, **extra)
    rows = [(float(t), float(s)) for t, s in zip(series.times, series.values)]
    for path in write_dataset(out_dir, "sync", SYNC_COLUMNS, rows, meta, output_format(args, config)):
        logger.info("Wrote %s", path)
    return EXIT_OK
