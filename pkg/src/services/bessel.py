"""Bessel functions of the first kind and their positive zeros."""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from src.services.errors import InvalidInputError

ZERO_XTOL = 1e-13
ZERO_RESIDUAL = 1e-10
# Sign-change scan step; consecutive zeros of J_n are never closer than ~2.
_SCAN_STEP = 0.125


def _check_order(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise InvalidInputError(f"Bessel order must be a non-negative integer, got {n!r}")
    return int(n)


def bessel_jn(n: int, x: float) -> float:
    """J_n(x) for integer n >= 0 and finite real x."""
    order = _check_order(n)
    if not math.isfinite(x):
        raise InvalidInputError(f"Bessel argument must be finite, got {x!r}")
    return float(special.jv(order, x))


def mcmahon_estimate(n: int, k: int) -> float:
    """Large-k asymptotic estimate of the k-th positive zero of J_n."""
    mu = 4.0 * n * n
    beta = (k + 0.5 * n - 0.25) * math.pi
    eight_beta = 8.0 * beta
    return (
        beta
        - (mu - 1.0) / eight_beta
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * eight_beta**3)
    )


@lru_cache(maxsize=256)
def _zeros(n: int, count: int) -> tuple[float, ...]:
    # J_n > 0 on (0, j_{n,1}) and j_{n,1} > n, so scanning starts just above max(n, 0).
    lower = max(float(n), _SCAN_STEP)
    upper = max(mcmahon_estimate(n, count), lower) + math.pi
    while True:
        xs = np.arange(lower, upper + _SCAN_STEP, _SCAN_STEP)
        values = special.jv(n, xs)
        crossings = np.flatnonzero(np.signbit(values[:-1]) != np.signbit(values[1:]))
        if crossings.size >= count:
            break
        upper += 2.0 * math.pi

    zeros = []
    for idx in crossings[:count]:
        a, b = float(xs[idx]), float(xs[idx + 1])
        if values[idx] == 0.0:
            zeros.append(a)
            continue
        zeros.append(optimize.brentq(lambda x: special.jv(n, x), a, b, xtol=ZERO_XTOL, rtol=4 * np.finfo(float).eps))
    return tuple(zeros)


def jn_zero(n: int, k: int) -> float:
    """k-th positive zero of J_n (k >= 1)."""
    order = _check_order(n)
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise InvalidInputError(f"Zero index must be a positive integer, got {k!r}")
    return _zeros(order, int(k))[-1]


@dataclass(frozen=True)
class BesselZeroTable:
    order: int
    zeros: tuple[float, ...]

    def __post_init__(self) -> None:
        _check_order(self.order)
        if any(b <= a for a, b in zip(self.zeros, self.zeros[1:])):
            raise InvalidInputError("Bessel zeros must be strictly increasing")
        for z in self.zeros:
            if z <= 0 or abs(special.jv(self.order, z)) >= ZERO_RESIDUAL:
                raise InvalidInputError(f"{z!r} is not a positive zero of J_{self.order}")

    def __len__(self) -> int:
        return len(self.zeros)

    def rows(self) -> list[tuple[int, float]]:
        return [(k, z) for k, z in enumerate(self.zeros, start=1)]


def bessel_zero_table(order: int, count: int) -> BesselZeroTable:
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise InvalidInputError(f"Zero count must be a positive integer, got {count!r}")
    return BesselZeroTable(order=_check_order(order), zeros=_zeros(_check_order(order), int(count)))


def jacobi_anger_series(a: float, tau, n_max: int):
    """Truncated expansion of exp(i*a*sin(tau)).

    Sum over |n| <= n_max of J_n(a) e^{i n tau}, folded into
    J_0(a) + 2 sum_{even n} J_n(a) cos(n tau) + 2i sum_{odd n} J_n(a) sin(n tau).
    """
    n_max = _check_order(n_max)
    tau = np.asarray(tau, dtype=float)
    total = np.full(tau.shape, special.jv(0, a), dtype=complex)
    for n in range(1, n_max + 1):
        jn = special.jv(n, a)
        if n % 2 == 0:
            total += 2.0 * jn * np.cos(n * tau)
        else:
            total += 2j * jn * np.sin(n * tau)
    return total if total.ndim else complex(total)


def jacobi_anger_residual(a: float, taus, n_max: int) -> float:
    taus = np.asarray(taus, dtype=float)
    exact = np.exp(1j * a * np.sin(taus))
    return float(np.max(np.abs(exact - jacobi_anger_series(a, taus, n_max))))
