import json
import warnings
from pathlib import Path

import numpy as np
import pytest

from hallspin.model import ChainSpec
from hallspin.physics import CouplingParams, NucleusSpec, calibrate_prefactor, magnetic_length

DEMO_DIR = Path(__file__).resolve().parent.parent / "demo"

PROTON_GAMMA = 2.6752218744e8  # rad/s/T
FIELD = 6.58  # tesla; magnetic length ~10 nm here
ANCHOR_J = 1e-23  # joules


def linear_chain(
    n: int,
    spacing: float | None = None,
    field: float = FIELD,
    gamma: float | list[float] = PROTON_GAMMA,
    z: int = 1,
    cutoff="all",
    coupling: CouplingParams | None = None,
) -> ChainSpec:
    """Uniform linear chain with anchor-calibrated coupling by default."""
    spacing = spacing if spacing is not None else magnetic_length(field)
    gammas = gamma if isinstance(gamma, (list, tuple)) else [gamma] * n
    nuclei = [NucleusSpec(z, gammas[q], f"n{q}") for q in range(n)]
    positions = np.array([[q * spacing, 0.0] for q in range(n)])
    coupling = coupling if coupling is not None else calibrate_prefactor(ANCHOR_J, 1.0, field)
    return ChainSpec(nuclei, positions, field, coupling, cutoff)


@pytest.fixture
def two_spin() -> ChainSpec:
    """The canonical pair: equal proton-like spins one magnetic length apart."""
    return linear_chain(2)


@pytest.fixture
def two_spin_bare() -> ChainSpec:
    """Same pair with zero gyromagnetic ratio (no Zeeman phases)."""
    return linear_chain(2, gamma=0.0)


@pytest.fixture
def demo_chain_path() -> Path:
    return DEMO_DIR / "chain_two_spin.json"


@pytest.fixture
def demo_program_path() -> Path:
    return DEMO_DIR / "iswap_transfer.json"


@pytest.fixture
def demo_chain_doc(demo_chain_path) -> dict:
    return json.loads(demo_chain_path.read_text())


@pytest.fixture
def demo_program_doc(demo_program_path) -> dict:
    return json.loads(demo_program_path.read_text())


@pytest.fixture(scope="session")
def client():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from hallspin.service.app import app

    return TestClient(app)
