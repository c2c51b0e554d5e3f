"""Strict JSON schemas for chain, program, and result files, with core converters.

Unknown keys are rejected everywhere: a typo in a physics input should be a
hard parse error, never a silently ignored field.
"""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import control
from .model import ChainSpec
from .physics import CouplingParams, NucleusSpec, calibrate_prefactor

__all__ = [
    "CouplingConfig",
    "NucleusConfig",
    "ChainFile",
    "ProgramFile",
    "ResultFile",
    "chain_from_file",
    "program_from_file",
    "program_to_file",
]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CouplingConfig(_Strict):
    """Exactly one of ``anchor_energy_joules`` (calibrates the prefactor) or
    ``v_prefactor`` must be present."""

    anchor_energy_joules: Optional[float] = None
    v_prefactor: Optional[float] = None
    c: float = 1.0
    cutoff: Union[Literal["all", "nn"], float] = "all"

    @model_validator(mode="after")
    def _one_strength(self) -> "CouplingConfig":
        if (self.anchor_energy_joules is None) == (self.v_prefactor is None):
            raise ValueError(
                "exactly one of anchor_energy_joules or v_prefactor is required"
            )
        return self


class NucleusConfig(_Strict):
    label: str
    z: int = Field(ge=1)
    gamma_rad_per_s_per_t: float
    position_nm: tuple[float, float]


class ChainFile(_Strict):
    field_tesla: float = Field(gt=0)
    coupling: CouplingConfig
    nuclei: list[NucleusConfig] = Field(min_length=1)


class DelayEvent(_Strict):
    type: Literal["delay"]
    seconds: float


class PulseEvent(_Strict):
    type: Literal["pulse"]
    target: int
    axis: tuple[float, float, float]
    angle: float


class SwitchEvent(_Strict):
    type: Literal["switch"]
    pair: tuple[int, int]
    factor: float


class MeasureEvent(_Strict):
    type: Literal["measure"]
    kind: Literal["single", "mask", "difference"]
    targets: list[int] = Field(min_length=1)


class InitializeEvent(_Strict):
    type: Literal["initialize"]


ProgramEvent = Annotated[
    Union[DelayEvent, PulseEvent, SwitchEvent, MeasureEvent, InitializeEvent],
    Field(discriminator="type"),
]


class ProgramFile(_Strict):
    name: str = ""
    description: str = ""
    events: list[ProgramEvent] = Field(default_factory=list)


class MeasurementRecord(_Strict):
    kind: str
    targets: list[int]
    values: list[int]
    probability: float


class EnsembleStats(_Strict):
    mean: float
    std_error: float
    replicas: int
    majority_value: Optional[int] = None


class ResultFile(_Strict):
    timestamp: str
    seed: int
    versions: dict[str, str]
    chain_qubits: int
    program_name: str
    readout_error: float
    t1_seconds: Optional[float] = None
    total_duration_seconds: float
    segment_count: int
    measurements: list[MeasurementRecord]
    final_state: Optional[list[tuple[float, float]]] = None
    ensemble: Optional[EnsembleStats] = None


def chain_from_file(doc: ChainFile) -> ChainSpec:
    """Build the core chain instance, calibrating the prefactor when anchored."""
    if doc.coupling.v_prefactor is not None:
        params = CouplingParams(
            v_prefactor=doc.coupling.v_prefactor, c_dimensionless=doc.coupling.c
        )
    else:
        params = calibrate_prefactor(
            anchor_energy=doc.coupling.anchor_energy_joules,
            z_ref=1.0,
            field_ref=doc.field_tesla,
            c_dimensionless=doc.coupling.c,
        )
    nuclei = [
        NucleusSpec(
            atomic_number=nuc.z,
            gyromagnetic_ratio=nuc.gamma_rad_per_s_per_t,
            label=nuc.label,
        )
        for nuc in doc.nuclei
    ]
    positions = np.array([nuc.position_nm for nuc in doc.nuclei], dtype=float)
    return ChainSpec(
        nuclei=nuclei,
        positions=positions,
        field=doc.field_tesla,
        coupling=params,
        coupling_cutoff=doc.coupling.cutoff,
    )


def program_from_file(doc: ProgramFile) -> control.Program:
    events: list[control.ControlEvent] = []
    for ev in doc.events:
        if isinstance(ev, DelayEvent):
            events.append(control.Delay(seconds=ev.seconds))
        elif isinstance(ev, PulseEvent):
            events.append(control.Pulse(target=ev.target, axis=ev.axis, angle=ev.angle))
        elif isinstance(ev, SwitchEvent):
            events.append(control.SetSwitch(pair=ev.pair, factor=ev.factor))
        elif isinstance(ev, InitializeEvent):
            events.append(control.InitializePumped())
        elif isinstance(ev, MeasureEvent):
            if ev.kind == "single":
                if len(ev.targets) != 1:
                    raise ValueError("single measurement takes exactly one target")
                events.append(control.MeasureSingle(target=ev.targets[0]))
            elif ev.kind == "mask":
                events.append(control.MeasureMask(targets=tuple(ev.targets)))
            else:
                if len(ev.targets) != 2:
                    raise ValueError("difference measurement takes exactly two targets")
                events.append(control.MeasureDifference(i=ev.targets[0], j=ev.targets[1]))
    return control.Program(events=tuple(events), name=doc.name, description=doc.description)


def program_to_file(program: control.Program) -> ProgramFile:
    events: list[ProgramEvent] = []
    for ev in program.events:
        if isinstance(ev, control.Delay):
            events.append(DelayEvent(type="delay", seconds=ev.seconds))
        elif isinstance(ev, control.Pulse):
            events.append(
                PulseEvent(type="pulse", target=ev.target, axis=tuple(ev.axis), angle=ev.angle)
            )
        elif isinstance(ev, control.SetSwitch):
            events.append(SwitchEvent(type="switch", pair=tuple(ev.pair), factor=ev.factor))
        elif isinstance(ev, control.InitializePumped):
            events.append(InitializeEvent(type="initialize"))
        elif isinstance(ev, control.MeasureSingle):
            events.append(MeasureEvent(type="measure", kind="single", targets=[ev.target]))
        elif isinstance(ev, control.MeasureMask):
            events.append(MeasureEvent(type="measure", kind="mask", targets=list(ev.targets)))
        elif isinstance(ev, control.MeasureDifference):
            events.append(MeasureEvent(type="measure", kind="difference", targets=[ev.i, ev.j]))
        else:
            raise ValueError(f"cannot serialize event {ev!r}")
    return ProgramFile(name=program.name, description=program.description, events=events)
