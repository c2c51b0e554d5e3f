"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..schemas import ChainFile, ProgramFile, ResultFile


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HealthResponse(_Strict):
    status: str
    version: str
    max_qubits: int


class ValidateRequest(_Strict):
    chain: ChainFile
    program: ProgramFile


class ValidateResponse(_Strict):
    diagnostics: list[str]


class SimulateRequest(_Strict):
    chain: ChainFile
    program: ProgramFile
    seed: int = 0
    readout_error: float = Field(default=0.0, ge=0.0, lt=0.5)
    t1_seconds: Optional[float] = Field(default=None, gt=0.0)
    emit_state: bool = False


SimulateResponse = ResultFile


class CompileRequest(_Strict):
    chain: ChainFile
    target: Literal["iswap", "cnot", "swap", "idle"]
    qubits: tuple[int, int] = (0, 1)
    tau_seconds: Optional[float] = Field(default=None, gt=0.0)
    budget_evaluations: Optional[int] = Field(default=None, ge=1)
    restarts: Optional[int] = Field(default=None, ge=1)
    seed: int = 0


class CompileResponse(_Strict):
    program: ProgramFile
    target: str
    qubits: tuple[int, int]
    fidelity: float
    converged: bool
    iterations: int
    duration_seconds: float


class EnsembleRequest(_Strict):
    chain: ChainFile
    program: ProgramFile
    observable: list[int] = Field(min_length=1)
    replicas: int = Field(ge=1)
    readout: Literal["expectation", "majority"] = "expectation"
    position_jitter_sigma: float = Field(default=0.0, ge=0.0)
    coupling_scale_sigma: float = Field(default=0.0, ge=0.0)
    readout_error: float = Field(default=0.0, ge=0.0, lt=0.5)
    seed: int = 0


class EnsembleResponse(_Strict):
    mean: float
    std_error: float
    replicas: int
    majority_value: Optional[int] = None
    per_replica: list[tuple[int, float]]


class SweepRequest(_Strict):
    chain: ChainFile
    program: ProgramFile
    param: Literal["field", "spacing", "coupling-sigma"]
    start: float
    stop: float
    steps: int = Field(ge=1)
    observable: list[int] = Field(min_length=1)
    replicas: int = Field(default=1, ge=1)
    position_jitter_sigma: float = Field(default=0.0, ge=0.0)
    readout_error: float = Field(default=0.0, ge=0.0, lt=0.5)
    seed: int = 0


class SweepRowModel(_Strict):
    param: float
    mean: float
    std_error: float
    replicas: int


class SweepResponse(_Strict):
    rows: list[SweepRowModel]
    csv: str
