"""`figures`: datasets and a plotting script for one published figure."""
import argparse

from src.config import get_settings
from src.handlers.common import SOLVER_INFO, add_output_arguments, resolve_output_dir
from src.handlers.errors import EXIT_OK
from src.handlers.qfunc import QGRID_COLUMNS
from src.handlers.sync import SYNC_COLUMNS
from src.services import analysis, dynamics, state
from src.services.figures import FIGURE_IDS, QGRID_PHI, QGRID_THETA, FigureRecipe, FigureSeries, figure_recipe, render_plot_script
from src.storage import atomic_write_text, metadata, write_csv, write_json
from src.utils.formatters import format_lifetime
from src.utils.logger import logger


def register(subparsers) -> None:
    parser = subparsers.add_parser("figures", help="regenerate the data behind a published figure")
    parser.add_argument("figure_id", choices=FIGURE_IDS, metavar="figure_id", help=", ".join(FIGURE_IDS))
    add_output_arguments(parser, formats=False)
    parser.add_argument("--t-max", type=float, default=None, help="override the gamma*t window of S(phi, t) figures")
    parser.set_defaults(handler=handle)


def _series_entry(series: FigureSeries, file_name: str, grid: dynamics.TimeGrid) -> dict:
    params = series.params.provenance()
    params["d_over_omega"] = series.d_over_omega
    return {
        "key": series.key,
        "panel": series.panel,
        "label": series.label,
        "params": params,
        "grid": grid.provenance(),
        "file": file_name,
    }


def _qgrid_series(recipe: FigureRecipe, series: FigureSeries, out_dir, init: state.InitialState) -> dict:
    if series.snapshot == 0.0:
        grid = dynamics.TimeGrid(t_max=1.0, n_steps=2)
        b = 1.0 + 0.0j
    else:
        grid = dynamics.TimeGrid.for_sampling(series.params, series.snapshot, series.sample_dt)
        b = complex(dynamics.solve_ode(series.params, grid).values[-1])
    mesh = state.husimi_grid(state.density_matrix(init, b), QGRID_THETA, QGRID_PHI)
    file_name = f"{recipe.figure_id}_{series.key}.csv"
    write_csv(out_dir / file_name, QGRID_COLUMNS, mesh.rows())
    entry = _series_entry(series, file_name, grid)
    entry.update(snapshot=series.snapshot, normalization=mesh.normalization, peak_phi=mesh.peak[1])
    logger.info("%s (%s): Q at gamma*t=%g, peak phi=%.4f", recipe.figure_id, series.key, series.snapshot, mesh.peak[1])
    return entry


def _sync_series(recipe: FigureRecipe, series: FigureSeries, out_dir, init: state.InitialState, epsilon: float) -> dict:
    grid = dynamics.TimeGrid.for_sampling(series.params, series.t_max, series.sample_dt)
    result = analysis.sync_series(series.params, init, grid, recipe.phi)
    lifetime = analysis.sync_lifetime(result, epsilon)
    file_name = f"{recipe.figure_id}_{series.key}.csv"
    write_csv(out_dir / file_name, SYNC_COLUMNS, [(float(t), float(s)) for t, s in zip(result.times, result.values)])
    entry = _series_entry(series, file_name, grid)
    entry.update(sync_lifetime=lifetime, envelope=analysis.envelope_samples(result))
    logger.info("%s (%s): sync lifetime %s", recipe.figure_id, series.key, format_lifetime(lifetime))
    return entry


def handle(args: argparse.Namespace) -> int:
    recipe = figure_recipe(args.figure_id, args.t_max)
    out_dir = resolve_output_dir(args)
    init = state.InitialState.equal_superposition()
    epsilon = get_settings().sync_epsilon

    entries, files = [], {}
    for series in recipe.series:
        if recipe.kind == "q-grid":
            entry = _qgrid_series(recipe, series, out_dir, init)
        else:
            entry = _sync_series(recipe, series, out_dir, init, epsilon)
        entries.append(entry)
        files[series.key] = entry["file"]

    rerun = ["figures", recipe.figure_id]
    if args.t_max is not None:
        rerun += ["--t-max", repr(args.t_max)]
    meta = metadata(
        "figures",
        figure_id=recipe.figure_id,
        title=recipe.title,
        kind=recipe.kind,
        phi=recipe.phi,
        initial={"c_g": [init.c_g.real, init.c_g.imag], "c_e": [init.c_e.real, init.c_e.imag]},
        solver=SOLVER_INFO,
        sync_epsilon=epsilon if recipe.kind == "sync" else None,
        mesh={"n_theta": QGRID_THETA, "n_phi": QGRID_PHI} if recipe.kind == "q-grid" else None,
        assumptions=list(recipe.assumptions),
        series=entries,
        rerun=rerun,
    )
    write_json(out_dir / f"{recipe.figure_id}.meta.json", meta)
    script = atomic_write_text(out_dir / f"plot_{recipe.figure_id}.py", render_plot_script(recipe, files))
    logger.info("Wrote %d dataset(s), %s.meta.json and %s", len(entries), recipe.figure_id, script.name)
    return EXIT_OK
