"""Transfer metrics, the timing budget and parameter sweeps."""

from __future__ import annotations

import itertools
import math
import os
from collections.abc import Mapping, Sequence
from multiprocessing import Pool

import numpy as np
import scipy.linalg
import scipy.optimize
from pydantic import ValidationError

from fluxqit.core.dynamics import build_jc_hamiltonian
from fluxqit.core.errors import ConfigError, DomainError
from fluxqit.core.protocol import build_qit_schedule, execute, qit_initial_state, transfer_target
from fluxqit.core.state_space import basis_state
from fluxqit.helpers.logger import get_logger
from fluxqit.models.enums import CardinalState, RecordOption, SweepAxis
from fluxqit.models.physics import JcCoupling, NoiseModel, SpectatorCoupling
from fluxqit.models.reports import (
    BudgetReport,
    ExecutionResult,
    InputState,
    SweepRow,
    TransferParams,
    TransferReport,
)
from fluxqit.models.schedule import Schedule
from fluxqit.models.space import DEFAULT_N_MAX, NORM_ATOL, DensityMatrix, SpaceLayout, StateVector

logger = get_logger("analysis")

BUDGET_THRESHOLD = 0.01
_FREQUENCY_SCAN_STEP = 0.05
_FREQUENCY_SCAN_PERIODS = 4.0

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_CARDINAL_AMPLITUDES: dict[CardinalState, tuple[complex, complex]] = {
    CardinalState.ZERO: (1.0, 0.0),
    CardinalState.ONE: (0.0, 1.0),
    CardinalState.PLUS: (_SQRT_HALF, _SQRT_HALF),
    CardinalState.MINUS: (_SQRT_HALF, -_SQRT_HALF),
    CardinalState.PLUS_I: (_SQRT_HALF, 1j * _SQRT_HALF),
    CardinalState.MINUS_I: (_SQRT_HALF, -1j * _SQRT_HALF),
}

State = StateVector | DensityMatrix


def _probabilities(state: State) -> np.ndarray:
    return state.probabilities().reshape(state.layout.dims)


def fidelity(state: State, target: StateVector) -> float:
    """|⟨target|ψ⟩|² for a pure state, ⟨target|ρ|target⟩ for a mixed one."""
    if state.layout != target.layout:
        raise DomainError(f"layout mismatch: {state.layout.dims} vs {target.layout.dims}")
    if not target.is_normalized(NORM_ATOL):
        raise DomainError(f"fidelity target has norm {target.norm}, expected 1")
    if isinstance(state, StateVector):
        return float(abs(np.vdot(target.amplitudes, state.amplitudes)) ** 2)
    t = target.amplitudes
    return float(np.real(np.vdot(t, state.matrix @ t)))


def leakage(state: State) -> float:
    """Population outside span{|0⟩,|1⟩}⊗{|0⟩,|1⟩}⊗|0⟩_c."""
    if not state.layout.is_qit:
        raise DomainError(f"leakage needs the two-qubit cavity layout, got {state.layout.dims}")
    p = _probabilities(state)
    return float(1.0 - p[:2, :2, 0].sum())


def cavity_residual(state: State) -> float:
    """Population outside the cavity vacuum."""
    p = _probabilities(state)
    return float(1.0 - p[..., 0].sum())


def total_time(g1: float, g2: float, omega: float) -> float:
    """τ = π/(2g₁) + π/(2g₂) + 2π/Ω."""
    for name, value in (("g1", g1), ("g2", g2), ("omega", omega)):
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")
    return math.pi / (2.0 * g1) + math.pi / (2.0 * g2) + 2.0 * math.pi / omega


def cavity_lifetime(q_factor: float, nu_c: float) -> float:
    """Photon lifetime κ⁻¹ = Q / (2πν_c), ν_c in Hz."""
    if not q_factor > 0 or not nu_c > 0:
        raise DomainError(f"quality factor and frequency must be positive, got {q_factor}, {nu_c}")
    return q_factor / (2.0 * math.pi * nu_c)


def cardinal_states() -> list[InputState]:
    """|0⟩, |1⟩, |±⟩ and |±i⟩ in that order."""
    return [
        InputState(label=label.value, alpha=alpha, beta=beta)
        for label, (alpha, beta) in _CARDINAL_AMPLITUDES.items()
    ]


def cardinal_state(label: str | CardinalState) -> InputState:
    try:
        key = CardinalState(label)
    except ValueError:
        names = ", ".join(state.value for state in CardinalState)
        raise DomainError(f"unknown input state '{label}' (expected one of {names})") from None
    alpha, beta = _CARDINAL_AMPLITUDES[key]
    return InputState(label=key.value, alpha=alpha, beta=beta)


def schedule_for(params: TransferParams) -> Schedule:
    return build_qit_schedule(
        params.g1,
        params.g2,
        params.omega,
        direction=params.direction,
        rabi_overrides=params.rabi_overrides,
    )


def operation_time(params: TransferParams, schedule: Schedule) -> float:
    """τ from the closed formula, or the summed durations when Rabi frequencies are overridden."""
    if params.rabi_overrides:
        return schedule.total_duration
    return total_time(params.g1, params.g2, params.omega)


def evaluate_input(
    params: TransferParams,
    schedule: Schedule,
    item: InputState,
    record: RecordOption = RecordOption.NONE,
) -> tuple[TransferReport, ExecutionResult]:
    """Execute ``schedule`` on one input and score the outcome."""
    initial = qit_initial_state(item.alpha, item.beta, n_max=params.n_max, direction=params.direction)
    target = transfer_target(item.alpha, item.beta, n_max=params.n_max, direction=params.direction)
    result = execute(
        schedule,
        initial,
        params.mode,
        noise=params.noise,
        spectators=params.spectators,
        record=record,
        dt=params.dt,
        open_coupling=params.open_coupling,
    )
    report = TransferReport(
        input_label=item.label,
        fidelity=fidelity(result.state, target),
        leakage=leakage(result.state),
        cavity_residual=cavity_residual(result.state),
        total_time=operation_time(params, schedule),
        mode=params.mode,
    )
    return report, result


def transfer_reports(
    params: TransferParams,
    inputs: Sequence[InputState] | None = None,
) -> list[TransferReport]:
    """Build the schedule once and transfer every input through it."""
    inputs = list(inputs) if inputs is not None else cardinal_states()
    schedule = schedule_for(params)
    return [evaluate_input(params, schedule, item)[0] for item in inputs]


def transfer_report(params: TransferParams, input_state: InputState) -> TransferReport:
    """Transfer one input and measure it against α|0⟩ + β|1⟩ on the target qubit."""
    return transfer_reports(params, [input_state])[0]


def mean_fidelity(reports: Sequence[TransferReport]) -> float:
    if not reports:
        raise DomainError("mean fidelity of an empty report set")
    return float(np.mean([report.fidelity for report in reports]))


def apply_point(fixed: TransferParams, point: Mapping[SweepAxis, float]) -> TransferParams:
    """Parameters at one grid point.

    Ratio axes scale from ``g1``: Ω = omega_over_g·g₁ and g₂ = g2_over_g1·g₁.
    Rate axes replace the matching noise rate.
    """
    data = fixed.model_dump()
    for axis, value in point.items():
        if axis == SweepAxis.OMEGA_OVER_G:
            data["omega"] = value * fixed.g1
        elif axis == SweepAxis.G2_OVER_G1:
            data["g2"] = value * fixed.g1
        else:
            data["noise"][axis.value] = value
    try:
        return TransferParams.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"grid point {_point_names(point)} is invalid: {e}") from e


def _point_names(point: Mapping[SweepAxis, float]) -> dict[str, float]:
    return {axis.value: value for axis, value in point.items()}


def grid_points(grid: Mapping[str, Sequence[float]]) -> list[dict[SweepAxis, float]]:
    """Cartesian product of the axes, first axis slowest."""
    if not grid:
        raise ConfigError("sweep grid is empty")
    axes: list[SweepAxis] = []
    columns: list[Sequence[float]] = []
    for name, values in grid.items():
        try:
            axes.append(SweepAxis(name))
        except ValueError:
            known = ", ".join(axis.value for axis in SweepAxis)
            raise ConfigError(f"unknown sweep axis '{name}' (expected one of {known})") from None
        if not values:
            raise ConfigError(f"sweep axis '{name}' has no values")
        columns.append(values)
    product = itertools.product(*columns)
    return [dict(zip(axes, (float(v) for v in values), strict=True)) for values in product]


def _evaluate_point(
    task: tuple[dict[SweepAxis, float], TransferParams, list[InputState]],
) -> list[SweepRow]:
    point, fixed, inputs = task
    params = apply_point(fixed, point)
    reports = transfer_reports(params, inputs)
    logger.info(
        "sweep_point_done",
        point=_point_names(point),
        mean_fidelity=mean_fidelity(reports),
    )
    return [SweepRow(point=_point_names(point), report=report) for report in reports]


def sweep(
    grid: Mapping[str, Sequence[float]],
    fixed: TransferParams,
    inputs: Sequence[InputState] | None = None,
    workers: int | None = 1,
) -> list[SweepRow]:
    """One row per (grid point, input) in axis-major order.

    ``workers`` > 1 evaluates grid points in a process pool; None uses every
    available CPU. Row order never depends on the worker count.
    """
    points = grid_points(grid)
    inputs = list(inputs) if inputs is not None else cardinal_states()
    tasks = [(point, fixed, inputs) for point in points]

    processes = min(workers or os.cpu_count() or 1, len(tasks))
    logger.info("sweep_started", points=len(points), inputs=len(inputs), workers=processes)
    if processes <= 1:
        batches = [_evaluate_point(task) for task in tasks]
    else:
        with Pool(processes=processes) as pool:
            batches = pool.map(_evaluate_point, tasks)

    return [row for batch in batches for row in batch]


def budget_report(
    g1: float,
    g2: float,
    omega: float,
    q_factor: float,
    nu_c: float,
    noise: NoiseModel | None = None,
    threshold: float = BUDGET_THRESHOLD,
) -> BudgetReport:
    """Compare τ with κ⁻¹ and with the shortest configured |3⟩ lifetime.

    A warning is raised for every ratio above ``threshold``.
    """
    tau = total_time(g1, g2, omega)
    kappa_inv = cavity_lifetime(q_factor, nu_c)
    ratio_cavity = tau / kappa_inv

    lifetimes = [1.0 / rate for rate in (noise.gamma_3r, noise.gamma_3p) if rate > 0] if noise else []
    min_decoherence = min(lifetimes) if lifetimes else None
    ratio_decoherence = tau / min_decoherence if min_decoherence else None

    warnings = []
    if ratio_cavity > threshold:
        warnings.append(
            f"tau/kappa_inv = {ratio_cavity:.3e} exceeds {threshold:g}: "
            "cavity decay is not negligible"
        )
    if ratio_decoherence is not None and ratio_decoherence > threshold:
        warnings.append(
            f"tau/min_decoherence_time = {ratio_decoherence:.3e} exceeds {threshold:g}: "
            "qubit decoherence is not negligible"
        )
    for message in warnings:
        logger.warning("budget_warning", message=message)

    return BudgetReport(
        tau=tau,
        kappa_inv=kappa_inv,
        min_decoherence_time=min_decoherence,
        ratio_cavity=ratio_cavity,
        ratio_decoherence=ratio_decoherence,
        threshold=threshold,
        warnings=warnings,
    )


def rabi_frequency(g: float, n: int = 0, n_max: int | None = None) -> float:
    """Angular frequency of the |3, n⟩ ↔ |2, n+1⟩ exchange, found numerically.

    The |3⟩|n⟩_c return amplitude cos(ω t) is evaluated from the eigendecomposition
    of the resonant Hamiltonian; its first zero t* is bracketed on a coarse scan
    and refined with Brent's method, giving ω = π / (2t*).
    """
    if not g > 0:
        raise DomainError(f"coupling must be positive, got {g}")
    if n < 0:
        raise DomainError(f"photon number must be non-negative, got {n}")
    layout = SpaceLayout.qit(max(n_max or DEFAULT_N_MAX, n + 1))

    h = build_jc_hamiltonian(JcCoupling(qubit=0, g=g), layout)
    energies, vectors = scipy.linalg.eigh(h.matrix)
    start = basis_state(layout, (3, 0, n)).amplitudes
    weights = np.abs(vectors.conj().T @ start) ** 2

    def amplitude(t: float) -> float:
        return float(np.sum(weights * np.cos(energies * t)))

    scale = 1.0 / g
    step = _FREQUENCY_SCAN_STEP * scale
    horizon = _FREQUENCY_SCAN_PERIODS * 2.0 * math.pi * scale
    left, value = 0.0, amplitude(0.0)
    while left < horizon:
        right = left + step
        next_value = amplitude(right)
        if value * next_value <= 0.0:
            zero = scipy.optimize.brentq(amplitude, left, right, xtol=scale * 1e-14)
            return math.pi / (2.0 * zero)
        left, value = right, next_value
    raise DomainError(f"no exchange found within {horizon:.3e} s")


def spectator_loss(
    params: TransferParams,
    spectators: Sequence[SpectatorCoupling],
    inputs: Sequence[InputState] | None = None,
) -> float:
    """Mean fidelity lost when ``spectators`` are switched on."""
    baseline = params.model_copy(update={"spectators": ()})
    coupled = params.model_copy(update={"spectators": tuple(spectators)})
    return mean_fidelity(transfer_reports(baseline, inputs)) - mean_fidelity(
        transfer_reports(coupled, inputs)
    )
