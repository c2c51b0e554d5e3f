"""Chain instance and assembly of the full spin Hamiltonian.

Basis convention: computational basis over 2^n states with qubit 0 as the
most significant bit; sigma_z |0> = +|0>, so the optically pumped state is
|00...0>. All Hamiltonian entries are angular frequencies (rad/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from functools import reduce
from typing import Iterator, Sequence, Union

import numpy as np

from .physics import CouplingParams, NucleusSpec, coupling_strength, larmor_frequency

__all__ = [
    "N_MAX",
    "ChainSpec",
    "SwitchMask",
    "pauli_operator",
    "build_hamiltonian",
    "coupling_table",
]

# Dense 2^n matrices; larger chains are rejected up front.
N_MAX = 14

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),  # sigma+ |1> = |0>
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),  # sigma- |0> = |1>
}

Cutoff = Union[str, float]


@dataclass
class ChainSpec:
    """The physical instance: nuclei, planar geometry, field, coupling law.

    ``coupling_cutoff`` selects which pairs interact: "all" (every pair),
    "nn" (chain-order nearest neighbors only), or a radius in nm.
    """

    nuclei: Sequence[NucleusSpec]
    positions: np.ndarray  # (n, 2) in nm
    field: float
    coupling: CouplingParams
    coupling_cutoff: Cutoff = "all"

    def __post_init__(self) -> None:
        self.nuclei = tuple(self.nuclei)
        self.positions = np.asarray(self.positions, dtype=float)
        n = len(self.nuclei)
        if self.positions.shape != (n, 2):
            raise ValueError(
                f"positions must have shape ({n}, 2), got {self.positions.shape}"
            )
        if not 1 <= n <= N_MAX:
            raise ValueError(f"chain size must be in [1, {N_MAX}], got {n}")
        if not (math.isfinite(self.field) and self.field > 0):
            raise ValueError(f"field must be positive, got {self.field}")
        if isinstance(self.coupling_cutoff, str):
            if self.coupling_cutoff not in ("all", "nn"):
                raise ValueError(f"unknown cutoff {self.coupling_cutoff!r}")
        else:
            self.coupling_cutoff = float(self.coupling_cutoff)
            if not (math.isfinite(self.coupling_cutoff) and self.coupling_cutoff > 0):
                raise ValueError("radius cutoff must be positive")
        for i in range(n):
            for j in range(i + 1, n):
                if self.separation(i, j) <= 0:
                    raise ValueError(f"spins {i} and {j} are coincident")

    @property
    def n(self) -> int:
        return len(self.nuclei)

    def separation(self, i: int, j: int) -> float:
        return float(np.linalg.norm(self.positions[i] - self.positions[j]))

    def larmor(self, j: int) -> float:
        return larmor_frequency(self.nuclei[j], self.field)

    def coupled_pairs(self) -> Iterator[tuple[int, int]]:
        """Ordered pairs (i < j) passing the coupling cutoff."""
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if self.coupling_cutoff == "nn" and j != i + 1:
                    continue
                if isinstance(self.coupling_cutoff, float) and (
                    self.separation(i, j) > self.coupling_cutoff
                ):
                    continue
                yield (i, j)

    def pair_coupling(self, i: int, j: int) -> float:
        """Unmasked J_ij in rad/s from the exchange law."""
        return coupling_strength(
            self.coupling,
            self.nuclei[i].atomic_number,
            self.nuclei[j].atomic_number,
            self.field,
            self.separation(i, j),
        )


@dataclass
class SwitchMask:
    """Per-pair attenuation factors in [0, 1]; pairs absent default to 1 (fully on)."""

    factors: dict[tuple[int, int], float] = dataclass_field(default_factory=dict)

    def __post_init__(self) -> None:
        normalized = {}
        for pair, f in self.factors.items():
            normalized[self._canonical(pair)] = self._checked(pair, f)
        self.factors = normalized

    @staticmethod
    def _canonical(pair: tuple[int, int]) -> tuple[int, int]:
        i, j = pair
        if i == j:
            raise ValueError(f"mask pair must have distinct qubits, got {pair}")
        return (min(i, j), max(i, j))

    @staticmethod
    def _checked(pair: tuple[int, int], f: float) -> float:
        if not (0.0 <= f <= 1.0):
            raise ValueError(f"mask factor for {pair} must be in [0, 1], got {f}")
        return float(f)

    def factor(self, i: int, j: int) -> float:
        return self.factors.get(self._canonical((i, j)), 1.0)

    def set(self, i: int, j: int, f: float) -> None:
        pair = self._canonical((i, j))
        self.factors[pair] = self._checked(pair, f)

    def copy(self) -> "SwitchMask":
        return SwitchMask(dict(self.factors))

    def key(self) -> tuple:
        """Hashable snapshot, usable as a propagator-cache key."""
        return tuple(sorted((p, f) for p, f in self.factors.items() if f != 1.0))


def pauli_operator(n: int, target: int, kind: str) -> np.ndarray:
    """Single-spin Pauli operator embedded in the 2^n space by Kronecker products."""
    if kind not in _PAULI:
        raise ValueError(f"unknown Pauli kind {kind!r}")
    if not 0 <= target < n:
        raise ValueError(f"target {target} out of range for {n} qubits")
    ops = [np.eye(2, dtype=complex)] * n
    ops[target] = _PAULI[kind]
    return reduce(np.kron, ops)


def build_hamiltonian(spec: ChainSpec, mask: SwitchMask | None = None) -> np.ndarray:
    """Assemble M = -sum_j w_j sz_j - sum_{i<j} mask_ij J_ij (s+_i s-_j + s-_i s+_j).

    Entries in rad/s. Hermitian by construction and block diagonal by total
    Hamming weight (both terms conserve total S_z). Assembled by direct
    index arithmetic rather than Kronecker products: the flip-flop term for
    a pair has only 2^(n-1) nonzero entries.
    """
    mask = mask if mask is not None else SwitchMask()
    for (i, j) in mask.factors:
        if not (0 <= i < spec.n and 0 <= j < spec.n):
            raise ValueError(f"mask pair ({i}, {j}) out of range for {spec.n} qubits")
    n = spec.n
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)

    ks = np.arange(dim)
    diag = np.zeros(dim)
    for q in range(n):
        bit = n - 1 - q  # qubit 0 is the most significant bit
        sz = 1.0 - 2.0 * ((ks >> bit) & 1)  # +1 for |0>, -1 for |1>
        diag -= spec.larmor(q) * sz
    m[ks, ks] = diag

    for (i, j) in spec.coupled_pairs():
        strength = mask.factor(i, j) * spec.pair_coupling(i, j)
        if strength == 0.0:
            continue
        bi, bj = n - 1 - i, n - 1 - j
        # states with qubit i = |1>, qubit j = |0>; flip-flop maps them to
        # the states with the two bits exchanged
        sel = ks[(((ks >> bi) & 1) == 1) & (((ks >> bj) & 1) == 0)]
        swapped = sel - (1 << bi) + (1 << bj)
        m[swapped, sel] -= strength
        m[sel, swapped] -= strength
    return m


def coupling_table(spec: ChainSpec) -> list[tuple[tuple[int, int], float]]:
    """All pairs passing the cutoff with their J in rad/s, sorted descending by J."""
    rows = [((i, j), spec.pair_coupling(i, j)) for (i, j) in spec.coupled_pairs()]
    rows.sort(key=lambda row: -row[1])
    return rows
