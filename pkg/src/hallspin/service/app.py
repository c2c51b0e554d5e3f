"""HTTP service wrapping the simulator: validation, simulation, compilation, sweeps.

Validation failures surface as 400 responses carrying a ``diagnostics``
list; numerical non-convergence is not an error at this layer (the compile
response carries a ``converged`` flag for clients to act on).
"""

from __future__ import annotations

import datetime

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, compiler, control, schemas, sweeps
from ..ensemble import DisorderParams, NoiseParams, majority_readout, run_ensemble
from ..model import N_MAX, ChainSpec
from . import schemas as api

__all__ = ["app", "create_app", "ServiceError"]


class ServiceError(Exception):
    def __init__(self, diagnostics: list[str], status_code: int = 400):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics
        self.status_code = status_code


def _build_chain(doc: schemas.ChainFile) -> ChainSpec:
    try:
        return schemas.chain_from_file(doc)
    except ValueError as exc:
        raise ServiceError([f"chain: {exc}"]) from exc


def _build_program(doc: schemas.ProgramFile, spec: ChainSpec) -> control.Program:
    try:
        program = schemas.program_from_file(doc)
    except ValueError as exc:
        raise ServiceError([f"program: {exc}"]) from exc
    diags = control.validate(program, spec)
    if diags:
        raise ServiceError([f"program: {d}" for d in diags])
    return program


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def create_app() -> FastAPI:
    app = FastAPI(title="hallspin", version=__version__)

    @app.exception_handler(ServiceError)
    async def service_error_handler(_: Request, exc: ServiceError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status_code, content={"diagnostics": exc.diagnostics}
        )

    @app.get("/health", response_model=api.HealthResponse)
    def health() -> api.HealthResponse:
        return api.HealthResponse(status="ok", version=__version__, max_qubits=N_MAX)

    @app.post("/validate", response_model=api.ValidateResponse)
    def validate(req: api.ValidateRequest) -> api.ValidateResponse:
        spec = _build_chain(req.chain)
        try:
            program = schemas.program_from_file(req.program)
        except ValueError as exc:
            return api.ValidateResponse(diagnostics=[f"program: {exc}"])
        return api.ValidateResponse(diagnostics=control.validate(program, spec))

    @app.post("/simulate", response_model=api.SimulateResponse)
    def simulate(req: api.SimulateRequest) -> api.SimulateResponse:
        spec = _build_chain(req.chain)
        program = _build_program(req.program, spec)
        noise = (
            NoiseParams(t1=req.t1_seconds, enabled=True) if req.t1_seconds is not None else None
        )
        result = control.run(
            program, spec, seed=req.seed, readout_error=req.readout_error, noise=noise
        )
        amplitudes = None
        if req.emit_state:
            amplitudes = [(float(a.real), float(a.imag)) for a in result.final_state.amplitudes]
        return schemas.ResultFile(
            timestamp=_timestamp(),
            seed=req.seed,
            versions={"hallspin": __version__, "result_format": "1"},
            chain_qubits=spec.n,
            program_name=program.name,
            readout_error=req.readout_error,
            t1_seconds=req.t1_seconds,
            total_duration_seconds=result.total_duration,
            segment_count=result.segment_count,
            measurements=[
                schemas.MeasurementRecord(
                    kind=m.kind,
                    targets=list(m.targets),
                    values=[int(v) for v in m.values],
                    probability=m.probability,
                )
                for m in result.measurement_log
            ],
            final_state=amplitudes,
        )

    @app.post("/compile", response_model=api.CompileResponse)
    def compile_(req: api.CompileRequest) -> api.CompileResponse:
        spec = _build_chain(req.chain)
        for q in req.qubits:
            if not 0 <= q < spec.n:
                raise ServiceError([f"compile: qubit {q} out of range for {spec.n}-qubit chain"])
        budget = None
        if req.budget_evaluations is not None or req.restarts is not None:
            defaults = compiler.SynthesisBudget()
            budget = compiler.SynthesisBudget(
                max_evaluations=req.budget_evaluations or defaults.max_evaluations,
                restarts=req.restarts or defaults.restarts,
            )
        try:
            result = compiler.compile_target(
                spec,
                req.target,
                qubits=req.qubits,
                tau=req.tau_seconds,
                budget=budget,
                seed=req.seed,
            )
        except compiler.CompilationError as exc:
            raise ServiceError([f"compile: {exc}"]) from exc
        _, duration = compiler.program_unitary(result.program, spec)
        return api.CompileResponse(
            program=schemas.program_to_file(result.program),
            target=req.target,
            qubits=req.qubits,
            fidelity=result.fidelity,
            converged=result.converged,
            iterations=result.iterations,
            duration_seconds=duration,
        )

    @app.post("/ensemble", response_model=api.EnsembleResponse)
    def ensemble(req: api.EnsembleRequest) -> api.EnsembleResponse:
        spec = _build_chain(req.chain)
        program = _build_program(req.program, spec)
        for q in req.observable:
            if not 0 <= q < spec.n:
                raise ServiceError([f"ensemble: observable qubit {q} out of range"])
        disorder = DisorderParams(
            position_jitter_sigma=req.position_jitter_sigma,
            coupling_scale_sigma=req.coupling_scale_sigma,
            readout_error=req.readout_error,
        )
        try:
            if req.readout == "majority":
                if len(req.observable) != 1:
                    raise ServiceError(
                        ["ensemble: majority readout takes a single observable qubit"]
                    )
                report = majority_readout(
                    program,
                    spec,
                    req.observable[0],
                    req.replicas,
                    readout_error=req.readout_error,
                    seed=req.seed,
                )
            else:
                report = run_ensemble(
                    program, spec, disorder, req.observable, req.replicas, seed=req.seed
                )
        except ValueError as exc:
            raise ServiceError([f"ensemble: {exc}"]) from exc
        return api.EnsembleResponse(
            mean=report.mean,
            std_error=report.std_error,
            replicas=report.replicas,
            majority_value=report.majority_value,
            per_replica=report.per_replica,
        )

    @app.post("/sweep", response_model=api.SweepResponse)
    def sweep(req: api.SweepRequest) -> api.SweepResponse:
        spec = _build_chain(req.chain)
        program = _build_program(req.program, spec)
        for q in req.observable:
            if not 0 <= q < spec.n:
                raise ServiceError([f"sweep: observable qubit {q} out of range"])
        disorder = DisorderParams(
            position_jitter_sigma=req.position_jitter_sigma,
            readout_error=req.readout_error,
        )
        values = sweeps.sweep_values(req.start, req.stop, req.steps)
        try:
            rows = sweeps.run_sweep(
                spec,
                program,
                req.param,
                values,
                req.observable,
                req.replicas,
                disorder=disorder,
                seed=req.seed,
            )
        except ValueError as exc:
            raise ServiceError([f"sweep: {exc}"]) from exc
        return api.SweepResponse(
            rows=[
                api.SweepRowModel(
                    param=r.param, mean=r.mean, std_error=r.std_error, replicas=r.replicas
                )
                for r in rows
            ],
            csv=sweeps.rows_to_csv(rows),
        )

    return app


app = create_app()
