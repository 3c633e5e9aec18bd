"""`qfunc`: Husimi Q meshes at snapshot times."""
import argparse

from src.handlers.common import (
    add_config_argument,
    add_output_arguments,
    load_config,
    output_format,
    resolve_output_dir,
    run_metadata,
)
from src.handlers.errors import EXIT_OK
from src.services import dynamics, state
from src.services.errors import InvalidInputError
from src.storage import write_dataset, write_json
from src.utils.logger import logger

QGRID_COLUMNS = ("theta", "phi", "q")
NORMALIZATION_TOLERANCE = 1e-6


def register(subparsers) -> None:
    parser = subparsers.add_parser("qfunc", help="Husimi Q-function meshes")
    add_config_argument(parser)
    add_output_arguments(parser)
    parser.add_argument("--times", type=float, nargs="+", default=None, help="gamma*t snapshots (default: config)")
    # Test hook: replace the evolved state by rho = I/2.
    parser.add_argument("--state", choices=("evolved", "mixed"), default="evolved", help=argparse.SUPPRESS)
    parser.set_defaults(handler=handle)


def snapshot_stem(t: float) -> str:
    return f"qgrid_t{t:g}"


def handle(args: argparse.Namespace) -> int:
    config = load_config(args)
    params = config.system_params()
    grid = config.grid()
    times = args.times or config.snapshot_times or [grid.t_max]
    outside = [t for t in times if not 0.0 <= t <= grid.t_max]
    if outside:
        raise InvalidInputError(f"snapshot times {outside} outside [0, {grid.t_max:g}]")
    out_dir = resolve_output_dir(args, config)
    fmt = output_format(args, config)
    init = config.initial_state()

    trajectory = dynamics.solve_ode(params, grid) if args.state == "evolved" else None
    report = []
    for t in times:
        if trajectory is None:
            snapshot = state.QubitState.maximally_mixed()
        else:
            snapshot = state.density_matrix(init, trajectory.at(t))
        mesh = state.husimi_grid(snapshot, config.n_theta, config.n_phi)
        theta_peak, phi_peak = mesh.peak
        entry = {
            "gamma_t": t,
            "file": snapshot_stem(t),
            "normalization": mesh.normalization,
            "normalized": abs(mesh.normalization - 1.0) <= NORMALIZATION_TOLERANCE,
            "peak": {"theta": theta_peak, "phi": phi_peak},
            "injected_state": args.state,
        }
        report.append(entry)
        meta = run_metadata("qfunc", config, grid, snapshot=entry, mesh={"n_theta": config.n_theta, "n_phi": config.n_phi})
        write_dataset(out_dir, snapshot_stem(t), QGRID_COLUMNS, list(mesh.rows()), meta, fmt)
        logger.info("Q snapshot gamma*t=%g: normalization %.9f, peak at phi=%.4f", t, mesh.normalization, phi_peak)

    write_json(out_dir / "qgrid_report.json", run_metadata("qfunc", config, grid, snapshots=report))
    return EXIT_OK
