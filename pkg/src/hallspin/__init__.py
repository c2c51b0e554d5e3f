"""hallspin: pulse-level simulation and gate compilation for nuclear-spin chains
coupled by electron-mediated XY exchange in the quantum-Hall regime."""

__version__ = "0.1.0"

from .physics import (  # noqa: F401
    CONSTANTS,
    CouplingParams,
    NucleusSpec,
    PhysicalConstants,
    calibrate_prefactor,
    coupling_strength,
    larmor_frequency,
    magnetic_length,
)
from .model import ChainSpec, N_MAX, SwitchMask, build_hamiltonian, coupling_table, pauli_operator  # noqa: F401
from .engine import StateVector, initialize_pumped  # noqa: F401
from .control import Program, run, validate  # noqa: F401
