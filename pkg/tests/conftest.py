import numpy as np
import pytest

from signalscope.machines import MachineKind
from signalscope.machines import cone_geometry
from signalscope.machines import qubit_pair_from_overlap
from signalscope.optimizer import SearchConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def half_pair():
    """Qubit pair with overlap 1/2."""
    return qubit_pair_from_overlap(0.5)


@pytest.fixture
def clone_geometry(half_pair):
    return cone_geometry(half_pair, MachineKind.CLONE)


@pytest.fixture
def delete_geometry(half_pair):
    return cone_geometry(half_pair, MachineKind.DELETE)


@pytest.fixture
def small_search():
    """A few restarts keep the numerical searches quick."""
    return SearchConfig(restarts=4, seed=0)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv("SIGNALSCOPE_SEED", raising=False)
    monkeypatch.delenv("DEBUG", raising=False)
