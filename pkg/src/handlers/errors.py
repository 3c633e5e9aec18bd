import argparse
from typing import Callable

from pydantic import ValidationError

from src.services.errors import ConfigError, InvalidInputError, SimulationError, SolverDivergenceError
from src.utils.logger import logger

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _first_validation_message(exc: ValidationError) -> str:
    error = exc.errors()[0]
    field = ".".join(str(part) for part in error["loc"])
    message = error["msg"].removeprefix("Value error, ")
    return f"{field}: {message}" if field else message


def run_handler(handler: Callable[[argparse.Namespace], int], args: argparse.Namespace) -> int:
    """Exit-code boundary: 0 success, 2 input/validation error, 3 numerical failure."""
    try:
        return handler(args)
    except ConfigError as exc:
        logger.error("Invalid configuration: %s", exc)
        return EXIT_INPUT
    except ValidationError as exc:
        logger.error("Invalid input: %s", _first_validation_message(exc))
        return EXIT_INPUT
    except InvalidInputError as exc:
        logger.error("Invalid input: %s", exc)
        return EXIT_INPUT
    except SolverDivergenceError as exc:
        logger.error("Solver diverged: %s", exc)
        return EXIT_NUMERICAL
    except SimulationError as exc:
        logger.error("Simulation failed: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        logger.error("Cannot write output: %s", exc)
        return EXIT_INPUT
    except Exception as exc:
        # Anything else escaped the numerics (overflow, linear algebra, ...).
        logger.exception("Unhandled error in %s", getattr(handler, "__module__", handler), exc_info=exc)
        return EXIT_NUMERICAL
