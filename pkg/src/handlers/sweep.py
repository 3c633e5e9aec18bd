"""`sweep`: one dataset per parameter value plus a provenance summary."""
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
from src.handlers.errors import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK
from src.handlers.qfunc import QGRID_COLUMNS
from src.handlers.simulate import AMPLITUDE_COLUMNS
from src.handlers.sync import SYNC_COLUMNS
from src.services import analysis
from src.storage import metadata, write_dataset, write_json
from src.utils.logger import logger


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="parameter sweep over omega, d or d/omega")
    add_config_argument(parser)
    add_output_arguments(parser)
    add_verify_argument(parser)
    parser.set_defaults(handler=handle)


def _write_row(out_dir, stem: str, row: analysis.SweepRow, meta: dict, fmt: str) -> list[str]:
    if row.series is not None:
        rows = [(float(t), float(s)) for t, s in zip(row.series.times, row.series.values)]
        return [p.name for p in write_dataset(out_dir, stem, SYNC_COLUMNS, rows, meta, fmt)]
    if row.snapshots:
        names = []
        for t, mesh in row.snapshots:
            snap_meta = {**meta, "snapshot": {"gamma_t": t, "normalization": mesh.normalization}}
            names += [p.name for p in write_dataset(out_dir, f"{stem}_t{t:g}", QGRID_COLUMNS, list(mesh.rows()), snap_meta, fmt)]
        return names
    return [p.name for p in write_dataset(out_dir, stem, AMPLITUDE_COLUMNS, amplitude_rows(row.trajectory), meta, fmt)]


def handle(args: argparse.Namespace) -> int:
    config = load_config(args)
    spec = config.sweep_spec()
    out_dir = resolve_output_dir(args, config)
    fmt = output_format(args, config)

    table = analysis.run_sweep(spec, config.initial_state(), config.grid_spec())
    if args.verify:
        table = analysis.verify_rows(table)

    records = table.summary_records()
    for row, record in zip(table.rows, records):
        if not row.ok:
            continue
        stem = f"sweep_{row.index:03d}"
        meta = run_metadata("sweep", config, row.grid, row=record, sweep_variable=spec.variable)
        record["files"] = _write_row(out_dir, stem, row, meta, fmt)

    summary = metadata(
        "sweep",
        sweep=spec.model_dump(mode="json", by_alias=True),
        rows=records,
        verification=[v.summary() for v in table.verification],
        config=config.to_mapping(),
    )
    write_json(out_dir / "sweep.json", summary)
    logger.info("Sweep summary written to %s", out_dir / "sweep.json")

    errors = [row.error or "" for row in table.rows if not row.ok]
    if any(not e.startswith("validation") for e in errors):
        return EXIT_NUMERICAL
    if errors:
        return EXIT_INPUT
    return EXIT_OK
