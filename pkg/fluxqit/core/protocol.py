"""The six-segment transfer schedule: builder, executor and closed-form oracle.

A state α|0⟩ + β|1⟩ stored on the source qubit is mapped into the cavity
(steps 1a-1c) and from the cavity onto the target qubit (steps 2a-2c):

    1a  drive source (1,3) φ=π and (0,2) φ=−π/2    π/(2Ω)
    1b  source exchanges with the cavity            π/(2g_source)
    1c  drive source (0,2) φ=π/2                     π/(2Ω)
    2a  drive target (0,2) φ=−π/2                    π/(2Ω)
    2b  target exchanges with the cavity            π/(2g_target)
    2c  drive target (1,3) φ=π and (0,2) φ=π/2      π/(2Ω)
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from typing import NamedTuple

import numpy as np

from fluxqit.core.dynamics import (
    analytic_jc_step,
    analytic_rabi_step,
    build_drive_hamiltonian,
    build_jc_hamiltonian,
    evolve_lindblad,
    lindblad_dt,
    propagate_time_dependent,
    propagator,
    schrodinger_dt,
)
from fluxqit.core.errors import DomainError, SimulationError
from fluxqit.core.state_space import marginal_populations
from fluxqit.helpers.logger import get_logger
from fluxqit.models.enums import (
    CouplingModel,
    ExecutionMode,
    RecordOption,
    SegmentKind,
    StepLabel,
    TransferDirection,
)
from fluxqit.models.physics import DriveSpec, JcCoupling, NoiseModel, SpectatorCoupling
from fluxqit.models.reports import ExecutionResult, TracePoint
from fluxqit.models.schedule import CavityWaitSegment, DriveSegment, PulseSegment, Schedule
from fluxqit.models.space import DEFAULT_N_MAX, DensityMatrix, Operator, SpaceLayout, StateVector

logger = get_logger("protocol")

SAMPLES_PER_SEGMENT = 200
INITIAL_NORM_ATOL = 1e-9
ORACLE_INPUT_ATOL = 1e-12
COMMUTATOR_RTOL = 1e-12
OTHER_QUBIT_RTOL = 1e-9


class _Pulse(NamedTuple):
    transition: tuple[int, int]
    phase: float


class _Step(NamedTuple):
    label: StepLabel
    on_target: bool
    pulses: tuple[_Pulse, ...]

    @property
    def is_wait(self) -> bool:
        return not self.pulses


RECIPE: tuple[_Step, ...] = (
    _Step(StepLabel.STEP_1A, False, (_Pulse((1, 3), math.pi), _Pulse((0, 2), -math.pi / 2))),
    _Step(StepLabel.STEP_1B, False, ()),
    _Step(StepLabel.STEP_1C, False, (_Pulse((0, 2), math.pi / 2),)),
    _Step(StepLabel.STEP_2A, True, (_Pulse((0, 2), -math.pi / 2),)),
    _Step(StepLabel.STEP_2B, True, ()),
    _Step(StepLabel.STEP_2C, True, (_Pulse((1, 3), math.pi), _Pulse((0, 2), math.pi / 2))),
)


def _coupling_of(schedule: Schedule, qubit: int) -> float:
    return schedule.g1 if qubit == 0 else schedule.g2


def build_qit_schedule(
    g1: float,
    g2: float,
    omega: float,
    *,
    direction: TransferDirection = TransferDirection.FORWARD,
    rabi_overrides: Mapping[StepLabel, float] | None = None,
) -> Schedule:
    """Build the transfer schedule.

    Every drive segment lasts π/(2Ω_seg) where Ω_seg is ``omega`` unless
    ``rabi_overrides`` names the segment; each wait lasts π/(2g) with the
    coupling of the qubit that exchanges with the cavity.
    """
    for name, value in (("g1", g1), ("g2", g2), ("omega", omega)):
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")

    overrides = {StepLabel(label): rate for label, rate in (rabi_overrides or {}).items()}
    for label, rate in overrides.items():
        if RECIPE[label.position].is_wait:
            raise DomainError(f"step {label.value} is a cavity wait and takes no Rabi frequency")
        if not rate > 0:
            raise DomainError(f"Rabi frequency for step {label.value} must be positive, got {rate}")

    couplings = (g1, g2)
    segments: list[PulseSegment] = []
    for step in RECIPE:
        qubit = direction.target if step.on_target else direction.source
        if step.is_wait:
            segments.append(
                CavityWaitSegment(
                    label=step.label,
                    qubit=qubit,
                    duration=math.pi / (2.0 * couplings[qubit]),
                )
            )
            continue

        rabi = overrides.get(step.label, omega)
        drives = [
            DriveSpec(qubit=qubit, transition=pulse.transition, rabi=rabi, phase=pulse.phase)
            for pulse in step.pulses
        ]
        segments.append(
            DriveSegment(label=step.label, drives=drives, duration=math.pi / (2.0 * rabi))
        )

    schedule = Schedule(segments=segments, g1=g1, g2=g2, omega=omega, direction=direction)
    logger.debug(
        "schedule_built",
        direction=direction.value,
        segments=len(segments),
        total_duration=schedule.total_duration,
    )
    return schedule


def qit_initial_state(
    alpha: complex,
    beta: complex,
    *,
    n_max: int = DEFAULT_N_MAX,
    direction: TransferDirection = TransferDirection.FORWARD,
) -> StateVector:
    """(α|0⟩ + β|1⟩) on the source qubit, the other qubit in |0⟩, the cavity empty."""
    return _load(alpha, beta, direction.source, SpaceLayout.qit(n_max))


def transfer_target(
    alpha: complex,
    beta: complex,
    *,
    n_max: int = DEFAULT_N_MAX,
    direction: TransferDirection = TransferDirection.FORWARD,
) -> StateVector:
    """The state a perfect transfer of α|0⟩ + β|1⟩ ends in."""
    return _load(alpha, beta, direction.target, SpaceLayout.qit(n_max))


def _load(alpha: complex, beta: complex, qubit: int, layout: SpaceLayout) -> StateVector:
    amplitudes = np.zeros(layout.dims, dtype=np.complex128)
    index = [0] * layout.n_subsystems
    amplitudes[tuple(index)] = alpha
    index[qubit] = 1
    amplitudes[tuple(index)] = beta
    norm = math.hypot(abs(alpha), abs(beta))
    if abs(norm - 1.0) > INITIAL_NORM_ATOL:
        raise DomainError(f"|alpha|^2 + |beta|^2 = {norm ** 2:.12f}, expected 1")
    return StateVector(layout, amplitudes.reshape(-1))


def intermediate_state_oracle(
    step_label: StepLabel,
    initial: StateVector,
    *,
    direction: TransferDirection = TransferDirection.FORWARD,
) -> StateVector:
    """The ket the recipe produces right after ``step_label``, in closed form.

    ``initial`` must be α|0⟩ + β|1⟩ on the source qubit with the other qubit in
    |0⟩ and the cavity empty. Each step is a π/2 rotation built from
    :func:`analytic_rabi_step` and :func:`analytic_jc_step`.
    """
    layout = initial.layout
    if not layout.is_qit:
        raise DomainError(f"oracle needs the two-qubit cavity layout, got {layout.dims}")
    if not initial.is_normalized(INITIAL_NORM_ATOL):
        raise DomainError(f"initial state has norm {initial.norm}, expected 1")

    source = direction.source
    tensor = np.array(initial.amplitudes).reshape(layout.dims)
    support = np.zeros(layout.dims, dtype=bool)
    corner = [0] * layout.n_subsystems
    support[tuple(corner)] = True
    corner[source] = 1
    support[tuple(corner)] = True
    stray = float(np.max(np.abs(tensor[~support])))
    if stray > ORACLE_INPUT_ATOL:
        raise DomainError(
            f"oracle input must be a superposition of |0> and |1> on qubit {source + 1} "
            f"with everything else in the ground state (stray amplitude {stray:.3e})"
        )

    quarter = math.pi / 2.0
    for step in RECIPE[: StepLabel(step_label).position + 1]:
        qubit = direction.target if step.on_target else direction.source
        if step.is_wait:
            view = np.moveaxis(tensor, (qubit, layout.cavity), (0, 1))
            for n in range(layout.n_max):
                view[3, n], view[2, n + 1] = analytic_jc_step(
                    1.0, quarter, view[3, n], view[2, n + 1], n
                )
            continue

        view = np.moveaxis(tensor, qubit, 0)
        for pulse in step.pulses:
            i, j = pulse.transition
            view[i], view[j] = analytic_rabi_step(1.0, pulse.phase, quarter, view[i], view[j])

    return StateVector(layout, tensor.reshape(-1))


def _check_drives_commute(parts: Sequence[Operator], label: StepLabel | None) -> None:
    for index, first in enumerate(parts):
        for second in parts[index + 1 :]:
            residual = first.commutator(second).norm
            if residual > COMMUTATOR_RTOL * first.norm * second.norm:
                raise SimulationError(
                    f"simultaneous drives of step {label} do not commute "
                    f"(commutator norm {residual:.3e})"
                )


def _action_norm(h: Operator, state: StateVector | DensityMatrix) -> float:
    """‖Hψ‖, or √tr(HρH) for a mixed state."""
    if isinstance(state, StateVector):
        return float(np.linalg.norm(h.matrix @ state.amplitudes))
    weight = np.real(np.trace(h.matrix @ state.matrix @ h.matrix))
    return math.sqrt(max(0.0, float(weight)))


def _segment_hamiltonian(
    segment: PulseSegment,
    coupling: CouplingModel,
    jc: tuple[Operator, Operator],
    layout: SpaceLayout,
) -> Operator:
    both = jc[0] + jc[1]
    if isinstance(segment, CavityWaitSegment):
        return both

    parts = [build_drive_hamiltonian(drive, layout) for drive in segment.drives]
    _check_drives_commute(parts, segment.label)
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    if coupling == CouplingModel.FULL:
        total = total + both
    return total


def _sample(
    time: float,
    index: int,
    segment: PulseSegment,
    state: StateVector | DensityMatrix,
    record: RecordOption,
) -> TracePoint:
    layout = state.layout
    marginals = marginal_populations(layout, state.probabilities())
    amplitudes = None
    if record == RecordOption.AMPLITUDES and isinstance(state, StateVector):
        amplitudes = np.array(state.amplitudes)
    return TracePoint(
        time=time,
        segment=index,
        label=segment.label,
        kind=SegmentKind(segment.kind),
        qubit_populations=tuple(marginals[q] for q in layout.qubits),
        photon_populations=marginals[layout.cavity],
        amplitudes=amplitudes,
    )


def execute(
    schedule: Schedule,
    initial: StateVector,
    mode: ExecutionMode = ExecutionMode.IDEALIZED,
    *,
    noise: NoiseModel | None = None,
    spectators: Sequence[SpectatorCoupling] = (),
    record: RecordOption = RecordOption.NONE,
    dt: float | None = None,
    open_coupling: CouplingModel = CouplingModel.FULL,
) -> ExecutionResult:
    """Run ``schedule`` on ``initial``.

    Idealized mode applies only the drives during drive segments and both
    cavity couplings during waits; it checks that the coupling of the qubit
    not scheduled to exchange leaves the state alone. Full mode keeps both
    cavity couplings on during drives as well. Open mode evolves the density
    matrix under ``noise`` with the coherent model chosen by ``open_coupling``.

    ``noise`` is only used in open mode. ``dt`` bounds the integrator step of
    time-dependent and Lindblad evolution and is derived per segment when None.
    """
    layout = initial.layout
    if not layout.is_qit:
        raise DomainError(f"execute needs the two-qubit cavity layout, got {layout.dims}")
    if not initial.is_normalized(INITIAL_NORM_ATOL):
        raise DomainError(f"initial state has norm {initial.norm}, expected 1")
    mode = ExecutionMode(mode)
    record = RecordOption(record)
    if mode == ExecutionMode.OPEN and record == RecordOption.AMPLITUDES:
        raise DomainError("amplitude recording needs a pure state; open mode evolves a density matrix")

    noise = noise or NoiseModel()
    if mode != ExecutionMode.OPEN and not noise.is_silent:
        logger.warning("noise_ignored", mode=mode.value)

    if mode == ExecutionMode.OPEN:
        coupling = CouplingModel(open_coupling)
    elif mode == ExecutionMode.FULL:
        coupling = CouplingModel.FULL
    else:
        coupling = CouplingModel.IDEALIZED

    active = [s for s in spectators if s.strength > 0.0]
    jc = (
        build_jc_hamiltonian(JcCoupling(qubit=0, g=schedule.g1), layout),
        build_jc_hamiltonian(JcCoupling(qubit=1, g=schedule.g2), layout),
    )

    state: StateVector | DensityMatrix = (
        initial.to_density() if mode == ExecutionMode.OPEN else initial
    )
    trace: list[TracePoint] = []
    if record != RecordOption.NONE:
        trace.append(_sample(0.0, 0, schedule.segments[0], state, record))

    chunks = SAMPLES_PER_SEGMENT if record != RecordOption.NONE else 1
    # noise can legitimately populate the idle qubit, so open mode only logs
    strict = not spectators and mode != ExecutionMode.OPEN
    start = 0.0
    for index, segment in enumerate(schedule.segments):
        h = _segment_hamiltonian(segment, coupling, jc, layout)

        idle: Operator | None = None
        if isinstance(segment, CavityWaitSegment) and coupling == CouplingModel.IDEALIZED:
            idle = jc[1 - segment.qubit]
            _check_idle_coupling(idle, state, schedule, segment, strict)

        step = segment.duration / chunks
        unitary = None
        if isinstance(state, DensityMatrix):
            step_dt = dt or lindblad_dt(h, noise, active)
        elif active:
            step_dt = dt or schrodinger_dt(h, active)
        else:
            unitary = propagator(h, step)

        for k in range(chunks):
            t0 = start + k * step
            if isinstance(state, DensityMatrix):
                state = evolve_lindblad(h, noise, state, step, step_dt, active, t0)
            elif unitary is not None:
                state = StateVector(layout, unitary @ state.amplitudes)
            else:
                state = propagate_time_dependent(h, active, state, step, step_dt, t0)
            if record != RecordOption.NONE:
                trace.append(_sample(t0 + step, index, segment, state, record))

        if idle is not None and isinstance(segment, CavityWaitSegment):
            _check_idle_coupling(idle, state, schedule, segment, strict)

        start += segment.duration
        logger.debug(
            "segment_executed",
            segment=index,
            label=segment.label.value if segment.label else None,
            kind=segment.kind,
            duration=segment.duration,
        )

    return ExecutionResult(state=state, trace=trace)


def _check_idle_coupling(
    idle: Operator,
    state: StateVector | DensityMatrix,
    schedule: Schedule,
    segment: CavityWaitSegment,
    strict: bool,
) -> None:
    acting = _action_norm(idle, state)
    if acting <= OTHER_QUBIT_RTOL * _coupling_of(schedule, 1 - segment.qubit):
        return
    label = segment.label.value if segment.label else None
    if strict:
        raise SimulationError(
            f"cavity coupling of qubit {2 - segment.qubit} acts during wait {label} "
            f"(|H psi| = {acting:.3e} rad/s); the idealized schedule assumes it is idle"
        )
    logger.warning("other_qubit_coupling_active", label=label, action=acting)
