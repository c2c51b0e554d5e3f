"""Replica ensembles: disorder sampling, expectation readout, majority voting, T1.

Replicas of the chain are driven by the same pulse program but differ by
uncontrollable fabrication disorder (position jitter, coupling-scale
spread). Expectation readout averages exact per-replica observables,
NMR-style; majority readout takes one noisy single-shot value per replica
and votes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import engine
from .control import Program, run
from .engine import StateVector
from .model import ChainSpec
from .physics import CouplingParams

__all__ = [
    "DisorderParams",
    "NoiseParams",
    "EnsembleReport",
    "sample_replica",
    "run_ensemble",
    "majority_readout",
    "apply_t1_channel",
]


@dataclass(frozen=True)
class DisorderParams:
    """Per-replica fabrication spread.

    ``position_jitter_sigma``: isotropic Gaussian displacement (nm) applied
    independently to every spin. ``coupling_scale_sigma``: width of the
    replica-wide multiplicative (1 + delta) coupling factor, resampled until
    delta > -0.9. ``readout_error``: per-shot reporting-flip probability.
    """

    position_jitter_sigma: float = 0.0
    coupling_scale_sigma: float = 0.0
    readout_error: float = 0.0

    def __post_init__(self) -> None:
        if self.position_jitter_sigma < 0 or self.coupling_scale_sigma < 0:
            raise ValueError("disorder sigmas must be >= 0")
        if not 0.0 <= self.readout_error < 0.5:
            raise ValueError(f"readout_error must be in [0, 0.5), got {self.readout_error}")


@dataclass(frozen=True)
class NoiseParams:
    """Phenomenological thermal relaxation; t1 in seconds, infinity disables."""

    t1: float = math.inf
    enabled: bool = False

    def __post_init__(self) -> None:
        if self.enabled and not self.t1 > 0:
            raise ValueError(f"t1 must be positive when enabled, got {self.t1}")


@dataclass
class EnsembleReport:
    per_replica: list[tuple[int, float]]  # (replica seed, value)
    mean: float
    std_error: float
    majority_value: int | None = None

    @property
    def replicas(self) -> int:
        return len(self.per_replica)


def _aggregate(seeds: Sequence[int], values: Sequence[float]) -> tuple[list, float, float]:
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    std_error = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return list(zip((int(s) for s in seeds), values.tolist())), mean, std_error


def sample_replica(spec: ChainSpec, disorder: DisorderParams, seed: int) -> ChainSpec:
    """One replica's perturbed chain; deterministic per seed.

    Positions get independent Gaussian jitter; the coupling prefactor is
    scaled by a replica-wide (1 + delta) factor. With all sigmas zero the
    spec is returned unchanged.
    """
    if disorder.position_jitter_sigma == 0.0 and disorder.coupling_scale_sigma == 0.0:
        return spec
    rng = np.random.default_rng(seed)
    positions = np.array(spec.positions, dtype=float)
    if disorder.position_jitter_sigma > 0.0:
        positions = positions + rng.normal(0.0, disorder.position_jitter_sigma, positions.shape)
    coupling = spec.coupling
    if disorder.coupling_scale_sigma > 0.0:
        delta = rng.normal(0.0, disorder.coupling_scale_sigma)
        while delta <= -0.9:
            delta = rng.normal(0.0, disorder.coupling_scale_sigma)
        coupling = CouplingParams(
            v_prefactor=coupling.v_prefactor * (1.0 + delta),
            c_dimensionless=coupling.c_dimensionless,
        )
    return ChainSpec(
        nuclei=spec.nuclei,
        positions=positions,
        field=spec.field,
        coupling=coupling,
        coupling_cutoff=spec.coupling_cutoff,
    )


def _replica_seeds(master: np.random.Generator, replicas: int) -> np.ndarray:
    # column 0 seeds the disorder draw, column 1 the run's measurement stream
    return master.integers(0, 2**63, size=(replicas, 2), dtype=np.uint64)


def run_ensemble(
    program: Program,
    spec: ChainSpec,
    disorder: DisorderParams,
    observable: Sequence[int],
    replicas: int,
    seed: int = 0,
) -> EnsembleReport:
    """Run the program on ``replicas`` disordered copies and average <prod sigma_z>.

    Each replica records the exact quantum expectation of the sigma_z
    product over ``observable`` on its final state (ensemble-average
    readout); the report aggregates mean and standard error.
    """
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    seeds = _replica_seeds(np.random.default_rng(seed), replicas)
    values = []
    for r in range(replicas):
        rspec = sample_replica(spec, disorder, int(seeds[r, 0]))
        result = run(program, rspec, seed=int(seeds[r, 1]), readout_error=disorder.readout_error)
        values.append(engine.sigma_z_product_expectation(result.final_state, observable))
    per_replica, mean, std_error = _aggregate(seeds[:, 0], values)
    return EnsembleReport(per_replica=per_replica, mean=mean, std_error=std_error)


def majority_readout(
    state_preparer: Program,
    spec: ChainSpec,
    target: int,
    replicas: int,
    readout_error: float = 0.0,
    seed: int = 0,
) -> EnsembleReport:
    """Majority vote over one noisy single-shot sigma_z value per replica.

    Replicas are identically prepared (no disorder here), so when the
    preparer itself contains no measurements the state is prepared once and
    each replica contributes an independent single shot; for an eigenstate
    input the majority error is the binomial tail in the flip probability.
    """
    if replicas < 1 or replicas % 2 == 0:
        raise ValueError(f"replicas must be a positive odd number, got {replicas}")
    if not 0.0 <= readout_error < 0.5:
        raise ValueError(f"readout_error must be in [0, 0.5), got {readout_error}")
    master = np.random.default_rng(seed)
    seeds = _replica_seeds(master, replicas)
    if state_preparer.has_measurements():
        values = []
        for r in range(replicas):
            result = run(state_preparer, spec, seed=int(seeds[r, 1]), readout_error=readout_error)
            outcome = engine.measure_single(
                result.final_state, target, readout_error, np.random.default_rng(int(seeds[r, 0]))
            )
            values.append(outcome.values[0])
        values = np.asarray(values)
    else:
        # identical replicas: prepare once, draw the single shots vectorized
        # from the master stream (already past the seed block above)
        prepared = run(state_preparer, spec, seed=0).final_state
        p_plus = (1.0 + engine.sigma_z_expectation(prepared, target)) / 2.0
        true_values = np.where(master.random(replicas) < p_plus, 1, -1)
        flips = master.random(replicas) < readout_error
        values = np.where(flips, -true_values, true_values)
    per_replica, mean, std_error = _aggregate(seeds[:, 0], values.astype(float))
    majority = 1 if int(values.sum()) > 0 else -1
    return EnsembleReport(
        per_replica=per_replica, mean=mean, std_error=std_error, majority_value=majority
    )


def apply_t1_channel(
    state: StateVector,
    dt: float,
    noise: NoiseParams,
    rng: np.random.Generator,
) -> StateVector:
    """One quantum-trajectory relaxation step after a segment of length dt.

    Each qubit independently, with probability 1 - exp(-dt/T1), is
    projectively reset toward the pumped state: measure sigma_z, then flip
    |1> to |0> if the outcome was -1. Norm is preserved exactly.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if not noise.enabled or dt == 0.0:
        return state
    p_jump = 1.0 - math.exp(-dt / noise.t1)
    if p_jump <= 0.0:
        return state
    current = state
    for q in range(state.n):
        if rng.random() < p_jump:
            outcome = engine.measure_single(current, q, 0.0, rng)
            current = outcome.post_state
            if outcome.values[0] == -1:
                current = _flip_qubit(current, q)
    return current


def _flip_qubit(state: StateVector, target: int) -> StateVector:
    """Exact bit-flip permutation on one qubit (sigma_x without the pulse phase)."""
    left = 1 << target
    right = 1 << (state.n - 1 - target)
    amps = state.amplitudes.reshape(left, 2, right)
    return StateVector(amps[:, ::-1, :].reshape(-1), state.n)
