"""Shared fixtures; the scripts import each other flat, so scripts/ goes on sys.path."""
import sys
from pathlib import Path

import pytest

SCRIPTS_DIR = Path(__file__).resolve().parent.parent / "scripts"
sys.path.insert(0, str(SCRIPTS_DIR))

from front_tracker import init_pattern  # noqa: E402
from initial_data import load_initial_data  # noqa: E402
from riemann_core import LagState  # noqa: E402

DATASETS = SCRIPTS_DIR / "datasets"


@pytest.fixture
def dataset():
    """Load a canonical dataset by name."""
    def _load(name: str, alpha: float = 1.0):
        return load_initial_data(DATASETS / f"{name}.json", alpha=alpha)
    return _load


@pytest.fixture
def two_shock_pattern():
    """One Riemann problem at y = 0.5 resolving into a 1-shock and a 2-shock."""
    cells = [(0.5, LagState(1.0, 0.3)), (0.5, LagState(1.0, -0.3))]
    return init_pattern(cells, alpha=1.0, eta=0.25)


@pytest.fixture
def crossing_pattern():
    """Two jumps whose inner shocks cross at y = 0.5."""
    cells = [
        (1 / 3, LagState(1.0, 0.3)),
        (1 / 3, LagState(1.0, 0.0)),
        (1 / 3, LagState(1.0, -0.3)),
    ]
    return init_pattern(cells, alpha=1.0, eta=0.25)
