import numpy as np
import pytest

from src.config import get_settings
from src.services.dynamics import SystemParams, TimeGrid
from src.services.state import InitialState, QubitState


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Fresh settings per test, with the default output directory under tmp_path."""
    for key in ("LOG_LEVEL", "FMQSYNC_SYNC_EPSILON", "FMQSYNC_MAX_WORKERS", "FMQSYNC_VERIFY_MAX_ROWS", "FMQSYNC_VERIFY_TOLERANCE"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("FMQSYNC_OUTPUT_DIR", str(tmp_path / "results"))
    settings = get_settings(reload=True)
    yield settings
    monkeypatch.undo()
    get_settings(reload=True)


@pytest.fixture
def weak() -> SystemParams:
    return SystemParams(lambda_=3.0)


@pytest.fixture
def strong() -> SystemParams:
    return SystemParams(lambda_=0.01)


@pytest.fixture
def superposition() -> InitialState:
    return InitialState.equal_superposition()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def random_state(rng: np.random.Generator) -> QubitState:
    """Random valid qubit state: a random pure state damped by a random |b| <= 1."""
    from src.services.state import density_matrix

    theta = rng.uniform(0.0, np.pi)
    c_e = np.cos(theta / 2) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    c_g = np.sin(theta / 2) + 0j
    b = rng.uniform(0.0, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return density_matrix(InitialState(c_g=complex(c_g), c_e=complex(c_e)), complex(b))


def grid(t_max: float, dt: float) -> TimeGrid:
    return TimeGrid(t_max=t_max, n_steps=round(t_max / dt))


def write_config(path, **values) -> str:
    lines = [f"{key} = {value}" for key, value in values.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)
