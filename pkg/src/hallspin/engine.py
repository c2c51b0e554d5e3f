"""Exact state-vector evolution, instantaneous pulses, and projective measurements.

Segment evolution is exp(-i M t) by Hermitian eigendecomposition. Hamiltonians
assembled from Zeeman + flip-flop terms conserve total S_z, so they are block
diagonal by Hamming weight; the eigensolver detects that structure and
diagonalizes block by block, which is what makes 12-qubit segments tractable.
Generic Hermitian input falls back to a full eigendecomposition.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .model import N_MAX

__all__ = [
    "StateVector",
    "Propagator",
    "MeasurementOutcome",
    "EigenCache",
    "initialize_pumped",
    "segment_propagator",
    "apply_propagator",
    "apply_pulse",
    "measure_single",
    "measure_mask",
    "measure_difference",
    "sigma_z_expectation",
    "sigma_z_product_expectation",
]

HERMITICITY_TOL = 1e-12


@dataclass
class StateVector:
    """2^n complex amplitude vector over the computational basis (qubit 0 = MSB)."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.shape[0] != (1 << self.n):
            raise ValueError(
                f"amplitude vector of length {self.amplitudes.shape[0]} "
                f"does not match n={self.n}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.n)

    @classmethod
    def from_basis_index(cls, n: int, index: int) -> "StateVector":
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1.0
        return cls(amps, n)


@dataclass(frozen=True)
class Propagator:
    """Cached unitary exp(-i M t) for one piecewise-constant segment."""

    unitary: np.ndarray
    duration: float
    source_key: Hashable = None


@dataclass
class MeasurementOutcome:
    kind: str  # "single" | "mask" | "difference"
    targets: tuple[int, ...]
    values: tuple[int, ...]  # reported eigenvalues (+1/-1, or -1/0/+1 for difference)
    post_state: StateVector
    probability: float  # Born probability of the realized projection


def initialize_pumped(n: int) -> StateVector:
    """The optically pumped state |00...0> (all spins aligned with the field)."""
    if not 1 <= n <= N_MAX:
        raise ValueError(f"qubit count must be in [1, {N_MAX}], got {n}")
    return StateVector.from_basis_index(n, 0)


def _check_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    scale = np.max(np.abs(h))
    if scale > 0 and np.max(np.abs(h - h.conj().T)) >= HERMITICITY_TOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return h


def _hamming_blocks(dim: int) -> list[np.ndarray]:
    n = dim.bit_length() - 1
    pop = np.zeros(dim, dtype=np.int64)
    for b in range(n):
        pop += (np.arange(dim) >> b) & 1
    return [np.nonzero(pop == k)[0] for k in range(n + 1)]


def _is_block_diagonal(h: np.ndarray, blocks: list[np.ndarray]) -> bool:
    # Off-block entries are exactly zero for S_z-conserving assemblies, so an
    # exact nonzero count settles it without any float tolerance.
    block_nnz = sum(int(np.count_nonzero(h[np.ix_(idx, idx)])) for idx in blocks)
    return block_nnz == int(np.count_nonzero(h))


def eigendecompose(h: np.ndarray) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Eigendecompose a Hermitian matrix, exploiting Hamming-weight block structure.

    Returns a list of (indices, eigenvalues, eigenvectors) triples covering
    the full space; a single triple with all indices when no block structure
    is present.
    """
    h = _check_hermitian(h)
    dim = h.shape[0]
    if dim > 2 and (dim & (dim - 1)) == 0:
        blocks = _hamming_blocks(dim)
        if _is_block_diagonal(h, blocks):
            out = []
            for idx in blocks:
                w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
                out.append((idx, w, v))
            return out
    w, v = np.linalg.eigh(h)
    return [(np.arange(dim), w, v)]


def propagator_from_eig(
    eig: list[tuple[np.ndarray, np.ndarray, np.ndarray]],
    dim: int,
    dt: float,
    source_key: Hashable = None,
) -> Propagator:
    """exp(-i M dt) from a precomputed eigendecomposition."""
    if dt < 0 or not math.isfinite(dt):
        raise ValueError(f"duration must be >= 0 and finite, got {dt}")
    u = np.zeros((dim, dim), dtype=complex)
    for idx, w, v in eig:
        phases = np.exp(-1j * w * dt)
        u[np.ix_(idx, idx)] = (v * phases) @ v.conj().T
    return Propagator(unitary=u, duration=dt, source_key=source_key)


def segment_propagator(h: np.ndarray, dt: float, source_key: Hashable = None) -> Propagator:
    """Unitary exp(-i M dt) for a Hamiltonian in rad/s over dt seconds."""
    h = np.asarray(h, dtype=complex)
    return propagator_from_eig(eigendecompose(h), h.shape[0], dt, source_key)


class EigenCache:
    """Eigendecompositions and propagators keyed by the segment's mask snapshot.

    Concurrent reads are safe; insertion is exclusive. Repeated delays under
    the same mask reuse the eigendecomposition, and repeated (mask, duration)
    pairs reuse the propagator outright.
    """

    def __init__(self) -> None:
        self._eig: dict[Hashable, tuple[list, int]] = {}
        self._props: dict[tuple[Hashable, float], Propagator] = {}
        self._lock = threading.Lock()

    def propagator(self, key: Hashable, h_builder, dt: float) -> Propagator:
        prop = self._props.get((key, dt))
        if prop is not None:
            return prop
        entry = self._eig.get(key)
        if entry is None:
            h = np.asarray(h_builder(), dtype=complex)
            entry = (eigendecompose(h), h.shape[0])
            with self._lock:
                self._eig.setdefault(key, entry)
        eig, dim = entry
        prop = propagator_from_eig(eig, dim, dt, source_key=key)
        with self._lock:
            self._props.setdefault((key, dt), prop)
        return prop


def apply_propagator(state: StateVector, prop: Propagator) -> StateVector:
    if prop.unitary.shape[0] != state.amplitudes.shape[0]:
        raise ValueError(
            f"propagator dimension {prop.unitary.shape[0]} does not match "
            f"state dimension {state.amplitudes.shape[0]}"
        )
    return StateVector(prop.unitary @ state.amplitudes, state.n)


def _rotation_2x2(axis: Sequence[float], angle: float) -> np.ndarray:
    nx, ny, nz = (float(a) for a in axis)
    if abs(math.sqrt(nx * nx + ny * ny + nz * nz) - 1.0) > 1e-9:
        raise ValueError(f"pulse axis must be a unit vector, got {axis}")
    c = math.cos(angle / 2)
    s = -1j * math.sin(angle / 2)
    return np.array(
        [[c + s * nz, s * (nx - 1j * ny)], [s * (nx + 1j * ny), c - s * nz]], dtype=complex
    )


def apply_pulse(state: StateVector, target: int, axis: Sequence[float], angle: float) -> StateVector:
    """Instantaneous rotation exp(-i angle (axis . sigma) / 2) on one spin."""
    if not 0 <= target < state.n:
        raise ValueError(f"target {target} out of range for {state.n} qubits")
    r = _rotation_2x2(axis, angle)
    left = 1 << target
    right = 1 << (state.n - 1 - target)
    amps = state.amplitudes.reshape(left, 2, right)
    return StateVector(np.einsum("ab,ibj->iaj", r, amps).reshape(-1), state.n)


def _bit_values(state: StateVector, target: int) -> np.ndarray:
    return (np.arange(1 << state.n) >> (state.n - 1 - target)) & 1


def _collapse(state: StateVector, keep: np.ndarray, prob: float) -> StateVector:
    amps = np.where(keep, state.amplitudes, 0.0)
    return StateVector(amps / math.sqrt(prob), state.n)


def measure_single(
    state: StateVector,
    target: int,
    readout_error: float = 0.0,
    rng: np.random.Generator | None = None,
) -> MeasurementOutcome:
    """Projective sigma_z measurement of one spin with classical reporting noise.

    The state collapses according to the true outcome; the reported value is
    flipped with probability ``readout_error``.
    """
    if not 0.0 <= readout_error < 0.5:
        raise ValueError(f"readout_error must be in [0, 0.5), got {readout_error}")
    if not 0 <= target < state.n:
        raise ValueError(f"target {target} out of range for {state.n} qubits")
    rng = rng if rng is not None else np.random.default_rng()
    bits = _bit_values(state, target)
    p_plus = float(np.sum(np.abs(state.amplitudes[bits == 0]) ** 2))
    if rng.random() < p_plus:
        true_value, prob, keep = 1, p_plus, bits == 0
    else:
        true_value, prob, keep = -1, 1.0 - p_plus, bits == 1
    post = _collapse(state, keep, prob)
    reported = -true_value if rng.random() < readout_error else true_value
    return MeasurementOutcome(
        kind="single",
        targets=(target,),
        values=(reported,),
        post_state=post,
        probability=prob,
    )


def measure_mask(
    state: StateVector,
    targets: Sequence[int],
    readout_error: float = 0.0,
    rng: np.random.Generator | None = None,
) -> MeasurementOutcome:
    """Simultaneous sigma_z measurement of several spins (one conductance mask).

    The sigma_z operators commute, so sequential single-spin projections
    realize the joint Born distribution. Reporting errors are independent
    per spin.
    """
    targets = tuple(targets)
    if not targets:
        raise ValueError("mask measurement needs at least one target")
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets in mask measurement: {targets}")
    rng = rng if rng is not None else np.random.default_rng()
    values = []
    joint_prob = 1.0
    current = state
    for t in targets:
        outcome = measure_single(current, t, readout_error, rng)
        values.append(outcome.values[0])
        joint_prob *= outcome.probability
        current = outcome.post_state
    return MeasurementOutcome(
        kind="mask",
        targets=targets,
        values=tuple(values),
        post_state=current,
        probability=joint_prob,
    )


def measure_difference(
    state: StateVector,
    i: int,
    j: int,
    rng: np.random.Generator | None = None,
) -> MeasurementOutcome:
    """Projective measurement of D = (sz_i - sz_j)/2 with eigenvalues {-1, 0, +1}.

    The 0-eigenspace (equal bits on i and j) is degenerate; collapse projects
    onto it without distinguishing within it.
    """
    if i == j:
        raise ValueError("difference measurement needs two distinct spins")
    for t in (i, j):
        if not 0 <= t < state.n:
            raise ValueError(f"target {t} out of range for {state.n} qubits")
    rng = rng if rng is not None else np.random.default_rng()
    bi, bj = _bit_values(state, i), _bit_values(state, j)
    weights = np.abs(state.amplitudes) ** 2
    sectors = {
        1: (bi == 0) & (bj == 1),
        -1: (bi == 1) & (bj == 0),
        0: bi == bj,
    }
    probs = {val: float(np.sum(weights[keep])) for val, keep in sectors.items()}
    u = rng.random()
    acc = 0.0
    value = 0
    for val in (1, -1, 0):
        acc += probs[val]
        if u < acc:
            value = val
            break
    post = _collapse(state, sectors[value], probs[value])
    return MeasurementOutcome(
        kind="difference",
        targets=(i, j),
        values=(value,),
        post_state=post,
        probability=probs[value],
    )


def sigma_z_expectation(state: StateVector, target: int) -> float:
    bits = _bit_values(state, target)
    signs = 1.0 - 2.0 * bits
    return float(np.sum(signs * np.abs(state.amplitudes) ** 2))


def sigma_z_product_expectation(state: StateVector, targets: Sequence[int]) -> float:
    """Expectation of the product of sigma_z over ``targets`` (diagonal observable)."""
    targets = tuple(targets)
    if not targets:
        raise ValueError("observable needs at least one qubit")
    signs = np.ones(1 << state.n)
    for t in targets:
        if not 0 <= t < state.n:
            raise ValueError(f"target {t} out of range for {state.n} qubits")
        signs *= 1.0 - 2.0 * _bit_values(state, t)
    return float(np.sum(signs * np.abs(state.amplitudes) ** 2))
