"""Physical constants, the quantum-Hall magnetic length, and the exchange coupling law.

Unit conventions used throughout the package:

* energies are stored as angular frequencies (E / hbar, rad/s),
* lengths in nanometers,
* magnetic fields in tesla,
* times in seconds.

The magnetic length is evaluated in SI as sqrt(hbar / (e H)), which equals
the Gaussian-units expression sqrt(hbar c / (e H)) numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "CouplingParams",
    "NucleusSpec",
    "magnetic_length",
    "coupling_strength",
    "calibrate_prefactor",
    "larmor_frequency",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 constants. Immutable; use the module-level ``CONSTANTS``."""

    hbar: float = 1.054571817e-34  # J*s
    electron_charge: float = 1.602176634e-19  # C
    speed_of_light: float = 2.99792458e8  # m/s


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class CouplingParams:
    """Parameters of the electron-mediated exchange law.

    ``v_prefactor`` carries units of angular frequency times field
    (rad/s * T); ``c_dimensionless`` is the order-1 pure number setting the
    decay scale relative to the magnetic length.
    """

    v_prefactor: float
    c_dimensionless: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v_prefactor) and self.v_prefactor > 0):
            raise ValueError(f"v_prefactor must be positive, got {self.v_prefactor}")
        if not (math.isfinite(self.c_dimensionless) and self.c_dimensionless > 0):
            raise ValueError(f"c_dimensionless must be positive, got {self.c_dimensionless}")


@dataclass(frozen=True)
class NucleusSpec:
    """A spin-1/2 nucleus: atomic number, gyromagnetic ratio (rad/s/T), label."""

    atomic_number: int
    gyromagnetic_ratio: float
    label: str = ""

    def __post_init__(self) -> None:
        if int(self.atomic_number) != self.atomic_number or self.atomic_number < 1:
            raise ValueError(f"atomic_number must be an integer >= 1, got {self.atomic_number}")
        if not math.isfinite(self.gyromagnetic_ratio):
            raise ValueError("gyromagnetic_ratio must be finite")


def magnetic_length(field: float) -> float:
    """Magnetic length in nm for an applied field in tesla.

    sqrt(hbar / (e H)); about 25.66 nm at 1 T and 10 nm at 6.58 T,
    scaling as 1/sqrt(H).
    """
    if not (math.isfinite(field) and field > 0):
        raise ValueError(f"field must be positive and finite, got {field}")
    return 1e9 * math.sqrt(CONSTANTS.hbar / (CONSTANTS.electron_charge * field))


def coupling_strength(
    params: CouplingParams,
    z1: float,
    z2: float,
    field: float,
    separation: float,
) -> float:
    """XY exchange strength J in rad/s for two nuclei a distance ``separation`` (nm) apart.

    J = (v Z1 Z2 / H) * sqrt(c l_H / r) * exp(-c r / l_H)

    J is the magnitude multiplying the flip-flop operator; the Hamiltonian
    carries the overall minus sign. Monotonically decreasing beyond
    r = l_H / (2c) and exponentially suppressed for r >> l_H.
    """
    if not (math.isfinite(separation) and separation > 0):
        raise ValueError(f"separation must be positive and finite, got {separation}")
    l_h = magnetic_length(field)  # validates field
    c = params.c_dimensionless
    x = separation / l_h
    return (params.v_prefactor * z1 * z2 / field) * math.sqrt(c / x) * math.exp(-c * x)


def calibrate_prefactor(
    anchor_energy: float = 1e-23,
    z_ref: float = 1.0,
    field_ref: float = 6.58,
    c_dimensionless: float = 1.0,
) -> CouplingParams:
    """Fix the unknown prefactor against an anchor interaction energy.

    Inverts the coupling law at r = l_H(field_ref) so that
    ``coupling_strength(params, z_ref, z_ref, field_ref, l_H)`` equals
    ``anchor_energy / hbar`` exactly. With c = 1 the profile factor at
    r = l_H is e^-1, giving v = (anchor/hbar) * H * e / z_ref^2.
    """
    if not (math.isfinite(anchor_energy) and anchor_energy > 0):
        raise ValueError(f"anchor_energy must be positive, got {anchor_energy}")
    if z_ref < 1:
        raise ValueError(f"z_ref must be >= 1, got {z_ref}")
    target = anchor_energy / CONSTANTS.hbar  # rad/s
    profile = math.sqrt(c_dimensionless) * math.exp(-c_dimensionless)
    v = target * field_ref / (z_ref * z_ref * profile)
    return CouplingParams(v_prefactor=v, c_dimensionless=c_dimensionless)


def larmor_frequency(nucleus: NucleusSpec, field: float) -> float:
    """Signed Larmor angular frequency gamma * H in rad/s."""
    if not (math.isfinite(field) and field > 0):
        raise ValueError(f"field must be positive and finite, got {field}")
    return nucleus.gyromagnetic_ratio * field
