"""Dataset files: CSV tables and JSON sidecars, written atomically."""
import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import ujson

from src import __version__
from src.utils.formatters import format_number
from src.utils.logger import logger

SCHEMA = "fmqsync.dataset/1"


def ensure_output_dir(path: Path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")
    return path


def atomic_write_text(path: Path, text: str) -> Path:
    """Write-temp-then-rename inside the target directory."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except FileNotFoundError:
            pass
        raise
    logger.debug("Wrote %s (%d bytes)", path, len(text))
    return path


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(cell) if isinstance(cell, (int, float)) else cell for cell in row])
    return buffer.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    return atomic_write_text(path, render_csv(header, rows))


def render_json(payload: dict) -> str:
    return ujson.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, escape_forward_slashes=False) + "\n"


def write_json(path: Path, payload: dict) -> Path:
    return atomic_write_text(path, render_json(payload))


def read_json(path: Path) -> dict:
    return ujson.loads(Path(path).read_text(encoding="utf-8"))


def metadata(command: str, **fields: Any) -> dict:
    """Sidecar skeleton shared by every dataset."""
    return {"schema": SCHEMA, "artifact_version": __version__, "command": command, **fields}


def write_dataset(
    out_dir: Path,
    stem: str,
    header: Sequence[str],
    rows: list[Sequence[Any]],
    meta: dict,
    output_format: str = "csv",
) -> list[Path]:
    """CSV + `<stem>.meta.json` sidecar, or a single `<stem>.json` holding both."""
    meta = {**meta, "columns": list(header), "row_count": len(rows)}
    if output_format == "json":
        payload = {"metadata": meta, "columns": list(header), "rows": [list(row) for row in rows]}
        return [write_json(out_dir / f"{stem}.json", payload)]
    data_path = write_csv(out_dir / f"{stem}.csv", header, rows)
    meta_path = write_json(out_dir / f"{stem}.meta.json", {**meta, "data_file": data_path.name})
    return [data_path, meta_path]
