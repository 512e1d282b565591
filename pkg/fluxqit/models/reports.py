"""Inputs, parameters and result records of transfer runs."""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, model_validator

from fluxqit.models.enums import (
    CouplingModel,
    ExecutionMode,
    SegmentKind,
    StepLabel,
    TransferDirection,
)
from fluxqit.models.physics import NoiseModel, SpectatorCoupling
from fluxqit.models.space import DEFAULT_N_MAX, ComplexArray, DensityMatrix, StateVector

INPUT_NORM_ATOL = 1e-9
REPORT_ATOL = 1e-9


class InputState(BaseModel):
    """Single-qubit state α|0⟩ + β|1⟩ loaded onto the source qubit."""

    model_config = ConfigDict(frozen=True)

    label: str
    alpha: complex
    beta: complex

    @model_validator(mode="after")
    def _normalized(self) -> "InputState":
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > INPUT_NORM_ATOL:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm:.12f}, expected 1")
        return self


class TransferParams(BaseModel):
    """Everything needed to build and execute one transfer."""

    model_config = ConfigDict(frozen=True)

    g1: PositiveFloat
    g2: PositiveFloat
    omega: PositiveFloat
    mode: ExecutionMode = ExecutionMode.IDEALIZED
    open_coupling: CouplingModel = CouplingModel.FULL
    noise: NoiseModel = Field(default_factory=NoiseModel)
    spectators: tuple[SpectatorCoupling, ...] = ()
    n_max: int = Field(default=DEFAULT_N_MAX, ge=1)
    dt: PositiveFloat | None = None
    direction: TransferDirection = TransferDirection.FORWARD
    rabi_overrides: dict[StepLabel, PositiveFloat] = Field(default_factory=dict)


class TransferReport(BaseModel):
    """Metrics of one transfer of one input state."""

    model_config = ConfigDict(frozen=True)

    input_label: str
    fidelity: float = Field(ge=-REPORT_ATOL, le=1.0 + REPORT_ATOL)
    leakage: float = Field(ge=-REPORT_ATOL, le=1.0 + REPORT_ATOL)
    cavity_residual: float = Field(ge=-REPORT_ATOL)
    total_time: PositiveFloat
    mode: ExecutionMode

    @model_validator(mode="after")
    def _bounded(self) -> "TransferReport":
        if self.fidelity + self.leakage > 1.0 + REPORT_ATOL:
            raise ValueError(
                f"fidelity {self.fidelity} plus leakage {self.leakage} exceeds 1"
            )
        return self


class BudgetReport(BaseModel):
    """Operation time against the cavity and qubit lifetimes."""

    model_config = ConfigDict(frozen=True)

    tau: PositiveFloat
    kappa_inv: PositiveFloat
    min_decoherence_time: PositiveFloat | None = None
    ratio_cavity: NonNegativeFloat
    ratio_decoherence: NonNegativeFloat | None = None
    threshold: PositiveFloat
    warnings: list[str] = Field(default_factory=list)

    @property
    def worst_ratio(self) -> float:
        ratios = [self.ratio_cavity]
        if self.ratio_decoherence is not None:
            ratios.append(self.ratio_decoherence)
        return max(ratios)

    @property
    def ok(self) -> bool:
        return not self.warnings


class SweepRow(BaseModel):
    """One (grid point, input) result of a sweep."""

    model_config = ConfigDict(frozen=True)

    point: dict[str, float]
    report: TransferReport


@dataclass(frozen=True)
class TracePoint:
    """Populations at one sample time of an execution.

    ``qubit_populations`` holds one four-entry array per qubit and
    ``photon_populations`` the cavity Fock distribution. ``amplitudes`` is
    only filled for pure-state amplitude recording.
    """

    time: float
    segment: int
    label: StepLabel | None
    kind: SegmentKind
    qubit_populations: tuple[NDArray[np.float64], ...]
    photon_populations: NDArray[np.float64]
    amplitudes: ComplexArray | None = None


@dataclass(frozen=True)
class ExecutionResult:
    """Final state of an execution plus its optional trace."""

    state: StateVector | DensityMatrix
    trace: list[TracePoint] = field(default_factory=list)

    @property
    def is_pure(self) -> bool:
        return isinstance(self.state, StateVector)
