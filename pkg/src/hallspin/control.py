"""Control-program intermediate representation and its deterministic interpreter.

A program is an ordered list of events: delays (evolution under the full
always-on Hamiltonian for the current switch mask), instantaneous pulses,
switch updates, measurements, and an optional leading initialization. Delays
are where physics happens; the interactions are on during them unless
switched off, so idling is a nontrivial unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import engine
from .engine import EigenCache, MeasurementOutcome, Propagator, StateVector
from .model import ChainSpec, SwitchMask, build_hamiltonian

__all__ = [
    "Delay",
    "Pulse",
    "SetSwitch",
    "MeasureSingle",
    "MeasureMask",
    "MeasureDifference",
    "InitializePumped",
    "ControlEvent",
    "Program",
    "RunResult",
    "validate",
    "run",
    "idle_unitary",
]


@dataclass(frozen=True)
class Delay:
    seconds: float


@dataclass(frozen=True)
class Pulse:
    target: int
    axis: tuple[float, float, float]
    angle: float


@dataclass(frozen=True)
class SetSwitch:
    pair: tuple[int, int]
    factor: float


@dataclass(frozen=True)
class MeasureSingle:
    target: int


@dataclass(frozen=True)
class MeasureMask:
    targets: tuple[int, ...]


@dataclass(frozen=True)
class MeasureDifference:
    i: int
    j: int


@dataclass(frozen=True)
class InitializePumped:
    pass


ControlEvent = Union[
    Delay, Pulse, SetSwitch, MeasureSingle, MeasureMask, MeasureDifference, InitializePumped
]


@dataclass
class Program:
    events: tuple[ControlEvent, ...] = ()
    name: str = ""
    description: str = ""

    def __post_init__(self) -> None:
        self.events = tuple(self.events)

    def has_measurements(self) -> bool:
        return any(
            isinstance(e, (MeasureSingle, MeasureMask, MeasureDifference)) for e in self.events
        )


@dataclass
class RunResult:
    final_state: StateVector
    measurement_log: list[MeasurementOutcome]
    total_duration: float
    segment_count: int


def _check_target(t: int, n: int) -> Optional[str]:
    if not isinstance(t, int) or isinstance(t, bool) or not 0 <= t < n:
        return f"target {t} out of range for {n}-qubit chain"
    return None


def validate(program: Program, spec: ChainSpec) -> list[str]:
    """Diagnostics for every malformed event; empty list means runnable."""
    n = spec.n
    diags: list[str] = []
    for k, event in enumerate(program.events):
        prefix = f"event {k}"
        if isinstance(event, Delay):
            if not (math.isfinite(event.seconds) and event.seconds >= 0):
                diags.append(f"{prefix}: delay duration must be >= 0, got {event.seconds}")
        elif isinstance(event, Pulse):
            bad = _check_target(event.target, n)
            if bad:
                diags.append(f"{prefix}: {bad}")
            if len(event.axis) != 3 or abs(np.linalg.norm(event.axis) - 1.0) > 1e-9:
                diags.append(f"{prefix}: pulse axis must be a unit 3-vector, got {event.axis}")
            if not math.isfinite(event.angle):
                diags.append(f"{prefix}: pulse angle must be finite")
        elif isinstance(event, SetSwitch):
            i, j = event.pair
            if i == j:
                diags.append(f"{prefix}: switch pair must have distinct qubits, got {event.pair}")
            for t in event.pair:
                bad = _check_target(t, n)
                if bad:
                    diags.append(f"{prefix}: {bad}")
            if not (0.0 <= event.factor <= 1.0):
                diags.append(f"{prefix}: switch factor must be in [0, 1], got {event.factor}")
        elif isinstance(event, MeasureSingle):
            bad = _check_target(event.target, n)
            if bad:
                diags.append(f"{prefix}: {bad}")
        elif isinstance(event, MeasureMask):
            if not event.targets:
                diags.append(f"{prefix}: mask measurement needs at least one target")
            if len(set(event.targets)) != len(event.targets):
                diags.append(f"{prefix}: duplicate mask targets {event.targets}")
            for t in event.targets:
                bad = _check_target(t, n)
                if bad:
                    diags.append(f"{prefix}: {bad}")
        elif isinstance(event, MeasureDifference):
            if event.i == event.j:
                diags.append(f"{prefix}: difference measurement needs two distinct qubits")
            for t in (event.i, event.j):
                bad = _check_target(t, n)
                if bad:
                    diags.append(f"{prefix}: {bad}")
        elif isinstance(event, InitializePumped):
            if k != 0:
                diags.append(f"{prefix}: initialization is only allowed as the first event")
        else:
            diags.append(f"{prefix}: unknown event type {type(event).__name__}")
    return diags


class ProgramValidationError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


def idle_unitary(
    spec: ChainSpec,
    mask: SwitchMask | None = None,
    duration: float = 0.0,
    cache: EigenCache | None = None,
) -> Propagator:
    """The propagator one delay segment applies under the given switch mask."""
    mask = mask if mask is not None else SwitchMask()
    key = mask.key()
    if cache is None:
        return engine.segment_propagator(build_hamiltonian(spec, mask), duration, key)
    return cache.propagator(key, lambda: build_hamiltonian(spec, mask), duration)


def run(
    program: Program,
    spec: ChainSpec,
    seed: int = 0,
    readout_error: float = 0.0,
    initial_state: StateVector | None = None,
    noise: "NoiseParams | None" = None,
    cache: EigenCache | None = None,
) -> RunResult:
    """Execute a program: deterministic given (program, spec, seed).

    The initial state is the pumped state unless one is supplied. Delays
    evolve under the Hamiltonian for the current mask; measurements use the
    engine models with the given reporting-error probability; when ``noise``
    is enabled, each delay is followed by a thermal-relaxation trajectory step.
    """
    diags = validate(program, spec)
    if diags:
        raise ProgramValidationError(diags)
    from .ensemble import apply_t1_channel  # local import to avoid a cycle

    rng = np.random.default_rng(seed)
    cache = cache if cache is not None else EigenCache()
    mask = SwitchMask()
    state = initial_state.copy() if initial_state is not None else engine.initialize_pumped(spec.n)
    if state.n != spec.n:
        raise ValueError(f"initial state has {state.n} qubits, chain has {spec.n}")
    log: list[MeasurementOutcome] = []
    total = 0.0
    segments = 0
    for event in program.events:
        if isinstance(event, InitializePumped):
            state = engine.initialize_pumped(spec.n)
        elif isinstance(event, Delay):
            prop = idle_unitary(spec, mask, event.seconds, cache)
            state = engine.apply_propagator(state, prop)
            total += event.seconds
            segments += 1
            if noise is not None and noise.enabled:
                state = apply_t1_channel(state, event.seconds, noise, rng)
        elif isinstance(event, Pulse):
            state = engine.apply_pulse(state, event.target, event.axis, event.angle)
        elif isinstance(event, SetSwitch):
            mask.set(event.pair[0], event.pair[1], event.factor)
        elif isinstance(event, MeasureSingle):
            outcome = engine.measure_single(state, event.target, readout_error, rng)
            state = outcome.post_state
            log.append(outcome)
        elif isinstance(event, MeasureMask):
            outcome = engine.measure_mask(state, event.targets, readout_error, rng)
            state = outcome.post_state
            log.append(outcome)
        elif isinstance(event, MeasureDifference):
            outcome = engine.measure_difference(state, event.i, event.j, rng)
            state = outcome.post_state
            log.append(outcome)
    return RunResult(
        final_state=state,
        measurement_log=log,
        total_duration=total,
        segment_count=segments,
    )
