"""Parameter sweeps over the chain instance, reported as ensemble statistics."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .control import Program
from .ensemble import DisorderParams, run_ensemble
from .model import ChainSpec

__all__ = ["SWEEP_PARAMS", "SweepRow", "apply_sweep_param", "sweep_values", "run_sweep", "rows_to_csv"]

SWEEP_PARAMS = ("field", "spacing", "coupling-sigma")


@dataclass(frozen=True)
class SweepRow:
    param: float
    mean: float
    std_error: float
    replicas: int


def apply_sweep_param(
    spec: ChainSpec, disorder: DisorderParams, param: str, value: float
) -> tuple[ChainSpec, DisorderParams]:
    """One sweep step's chain and disorder.

    ``field`` replaces the applied field (prefactor untouched, so couplings
    follow the law's field dependence); ``spacing`` rescales the geometry so
    the minimum pairwise separation equals the value in nm;
    ``coupling-sigma`` sets the replica coupling-scale spread.
    """
    if param == "field":
        return replace(spec, field=float(value)), disorder
    if param == "spacing":
        if spec.n < 2:
            raise ValueError("spacing sweep needs at least two spins")
        if value <= 0:
            raise ValueError(f"spacing must be positive, got {value}")
        min_sep = min(spec.separation(i, j) for i in range(spec.n) for j in range(i + 1, spec.n))
        scaled = np.array(spec.positions, dtype=float) * (float(value) / min_sep)
        return replace(spec, positions=scaled), disorder
    if param == "coupling-sigma":
        if value < 0:
            raise ValueError(f"coupling-sigma must be >= 0, got {value}")
        return spec, replace(disorder, coupling_scale_sigma=float(value))
    raise ValueError(f"unknown sweep parameter {param!r}; expected one of {SWEEP_PARAMS}")


def sweep_values(start: float, stop: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    return np.linspace(start, stop, steps)


def run_sweep(
    spec: ChainSpec,
    program: Program,
    param: str,
    values: Sequence[float],
    observable: Sequence[int],
    replicas: int,
    disorder: DisorderParams | None = None,
    seed: int = 0,
) -> list[SweepRow]:
    """One ensemble run per parameter value; deterministic per seed."""
    disorder = disorder if disorder is not None else DisorderParams()
    step_seeds = np.random.default_rng(seed).integers(0, 2**63, size=len(values), dtype=np.uint64)
    rows = []
    for value, step_seed in zip(values, step_seeds):
        step_spec, step_disorder = apply_sweep_param(spec, disorder, param, float(value))
        report = run_ensemble(
            program, step_spec, step_disorder, observable, replicas, seed=int(step_seed)
        )
        rows.append(
            SweepRow(
                param=float(value),
                mean=report.mean,
                std_error=report.std_error,
                replicas=replicas,
            )
        )
    return rows


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = ["param,mean,std_error,replicas"]
    for row in rows:
        lines.append(f"{row.param!r},{row.mean!r},{row.std_error!r},{row.replicas}")
    return "\n".join(lines) + "\n"
