from src.handlers import figures, qfunc, simulate, sweep, sync, zeros


def register_handlers(subparsers) -> None:
    # Order is the order shown in --help.
    simulate.register(subparsers)
    qfunc.register(subparsers)
    sync.register(subparsers)
    sweep.register(subparsers)
    figures.register(subparsers)
    zeros.register(subparsers)
