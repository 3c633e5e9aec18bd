"""`zeros`: table of positive zeros of J_n."""
import argparse

from src.handlers.errors import EXIT_OK
from src.services.bessel import bessel_zero_table
from src.utils.formatters import format_table, format_zero


def register(subparsers) -> None:
    parser = subparsers.add_parser("zeros", help="positive zeros of the Bessel function J_n")
    parser.add_argument("--order", type=int, required=True, help="Bessel order n >= 0")
    parser.add_argument("--count", type=int, required=True, help="number of zeros k >= 1")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    table = bessel_zero_table(args.order, args.count)
    print(f"Zeros of J_{table.order}")
    print(format_table(("k", "zero"), [(k, format_zero(z)) for k, z in table.rows()]))
    return EXIT_OK
