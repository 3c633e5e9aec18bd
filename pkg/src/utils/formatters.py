from typing import Any, Iterable

NA = "n/a"


def format_number(value: float | int | None) -> str:
    """Lossless double formatting (17 significant digits, '.' separator)."""
    if value is None:
        return NA
    return f"{float(value):.17g}"


def format_zero(value: float) -> str:
    """Six significant digits, as Bessel zeros are quoted in figure captions."""
    return f"{value:.6g}"


def format_lifetime(value: float | None) -> str:
    if value is None:
        return NA
    return f"{value:.4g}"


def format_table(header: Iterable[Any], rows: Iterable[Iterable[Any]]) -> str:
    """Plain left-aligned text table for terminal output."""
    header = [str(h) for h in header]
    body = [[str(cell) for cell in row] for row in rows]
    widths = [len(h) for h in header]
    for row in body:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in body)
    return "\n".join(lines)
