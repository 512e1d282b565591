"""Hamiltonians, closed-form rotations and time evolution.

Time-independent unitary steps use the Hermitian eigendecomposition of H.
Time-dependent Schrödinger and Lindblad evolution use a fixed-step classical
fourth-order Runge-Kutta scheme: an interval t is split into ceil(t / dt)
equal steps, so ``dt`` is an upper bound on the step actually taken.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence

import numpy as np
import scipy.linalg

from fluxqit.core.errors import DomainError, PreconditionError
from fluxqit.core.state_space import annihilation, embed, projector, sigma
from fluxqit.helpers.logger import get_logger
from fluxqit.models.physics import DriveSpec, JcCoupling, NoiseModel, SpectatorCoupling
from fluxqit.models.space import ComplexArray, DensityMatrix, Operator, SpaceLayout, StateVector

logger = get_logger("dynamics")

SPECTATOR_SAMPLES_PER_PERIOD = 50
LINDBLAD_STEP_FRACTION = 0.01
LINDBLAD_DEFAULT_FRACTION = 0.005
SCHRODINGER_STEP_FRACTION = 0.01
NORM_DRIFT_WARNING = 1e-8
_STEP_SLACK = 1.0 + 1e-12

# (operator, detuning): the term operator·e^{−iΔt} + h.c.
_RotatingTerm = tuple[ComplexArray, float]


def _check_qubit(layout: SpaceLayout, qubit: int) -> None:
    if qubit not in layout.qubits:
        raise DomainError(f"qubit {qubit} is not a qubit subsystem of layout {layout.dims}")


def _hermitian(layout: SpaceLayout, lowering: ComplexArray) -> Operator:
    return Operator(layout, lowering + lowering.conj().T, hermitian=True)


def build_jc_hamiltonian(coupling: JcCoupling, layout: SpaceLayout) -> Operator:
    """g(a⁺σ₂₃⁻ + aσ₂₃⁺) between ``coupling.qubit`` and the cavity."""
    _check_qubit(layout, coupling.qubit)
    lower = embed(sigma(2, 3), coupling.qubit, layout).matrix
    raise_photon = embed(annihilation(layout.n_max).conj().T, layout.cavity, layout).matrix
    return _hermitian(layout, coupling.g * (raise_photon @ lower))


def build_drive_hamiltonian(drive: DriveSpec, layout: SpaceLayout) -> Operator:
    """Ω(e^{iφ}|i⟩⟨j| + e^{−iφ}|j⟩⟨i|) on ``drive.qubit``."""
    _check_qubit(layout, drive.qubit)
    i, j = drive.transition
    term = drive.rabi * np.exp(1j * drive.phase) * sigma(i, j)
    return _hermitian(layout, embed(term, drive.qubit, layout).matrix)


def spectator_operator(spectator: SpectatorCoupling, layout: SpaceLayout) -> ComplexArray:
    """The g'a⁺σ_ij⁻ part of a spectator term; the Hamiltonian adds its rotating conjugate."""
    _check_qubit(layout, spectator.qubit)
    i, j = spectator.transition
    lower = embed(sigma(i, j), spectator.qubit, layout).matrix
    raise_photon = embed(annihilation(layout.n_max).conj().T, layout.cavity, layout).matrix
    return spectator.strength * (raise_photon @ lower)


def excitation_number_operator(layout: SpaceLayout) -> Operator:
    """a⁺a plus one for every qubit in |3⟩; conserved by the resonant coupling."""
    a = annihilation(layout.n_max)
    total = embed(a.conj().T @ a, layout.cavity, layout).matrix.copy()
    for qubit in layout.qubits:
        total += projector(layout, qubit, 3).matrix
    return Operator(layout, total, hermitian=True)


def collapse_operators(noise: NoiseModel, layout: SpaceLayout) -> list[ComplexArray]:
    """Lindblad jump operators with the rates folded in; zero-rate channels are omitted.

    Relaxation of |3⟩ goes to |2⟩ by default with optional branches to |1⟩ and
    |0⟩. Dephasing of |3⟩ uses √(γ₃p/2)(2|3⟩⟨3| − I), which damps ⟨3|ρ|k⟩
    (k ≠ 3) at rate γ₃p.
    """
    jumps: list[ComplexArray] = []
    relaxations = (
        (noise.gamma_3r * noise.branch_3_to_2, 2, 3),
        (noise.gamma_3r * noise.branch_3_to_1, 1, 3),
        (noise.gamma_3r * noise.branch_3_to_0, 0, 3),
        (noise.gamma_2r, 1, 2),
        (noise.gamma_1r, 0, 1),
    )
    for qubit in layout.qubits:
        for rate, lower, upper in relaxations:
            if rate > 0.0:
                jumps.append(math.sqrt(rate) * embed(sigma(lower, upper), qubit, layout).matrix)
        if noise.gamma_3p > 0.0:
            local = 2.0 * sigma(3, 3) - np.eye(4, dtype=np.complex128)
            jumps.append(math.sqrt(noise.gamma_3p / 2.0) * embed(local, qubit, layout).matrix)
    if noise.kappa > 0.0:
        a = annihilation(layout.n_max)
        jumps.append(math.sqrt(noise.kappa) * embed(a, layout.cavity, layout).matrix)
    return jumps


def analytic_jc_step(
    g: float,
    t: float,
    amp_30: complex,
    amp_21: complex,
    n: int = 0,
) -> tuple[complex, complex]:
    """Closed-form resonant exchange in the {|3⟩|n⟩_c, |2⟩|n+1⟩_c} sector.

    Works elementwise, so numpy arrays of amplitudes are rotated in one call.
    """
    if t < 0:
        raise DomainError(f"evolution time must be non-negative, got {t}")
    angle = g * math.sqrt(n + 1) * t
    c, s = math.cos(angle), math.sin(angle)
    return c * amp_30 - 1j * s * amp_21, c * amp_21 - 1j * s * amp_30


def analytic_rabi_step(
    omega: float,
    phase: float,
    t: float,
    amp_i: complex,
    amp_j: complex,
) -> tuple[complex, complex]:
    """Closed-form resonant pulse on levels (i, j):

    |i⟩ → cos(Ωt)|i⟩ − i e^{−iφ} sin(Ωt)|j⟩,  |j⟩ → cos(Ωt)|j⟩ − i e^{iφ} sin(Ωt)|i⟩.
    """
    if t < 0:
        raise DomainError(f"evolution time must be non-negative, got {t}")
    c, s = math.cos(omega * t), math.sin(omega * t)
    forward = -1j * np.exp(-1j * phase) * s
    backward = -1j * np.exp(1j * phase) * s
    return c * amp_i + backward * amp_j, forward * amp_i + c * amp_j


def propagator(h: Operator, t: float) -> ComplexArray:
    """exp(−iHt) from the eigendecomposition of H."""
    if not h.is_hermitian():
        raise DomainError("propagation needs a Hermitian generator")
    if t == 0.0:
        return np.eye(h.layout.total_dim, dtype=complex)
    energies, vectors = scipy.linalg.eigh(h.matrix)
    return (vectors * np.exp(-1j * energies * t)) @ vectors.conj().T


def propagate(h: Operator, psi: StateVector, t: float) -> StateVector:
    """exp(−iHt)|ψ⟩."""
    if h.layout != psi.layout:
        raise DomainError(f"layout mismatch: {h.layout.dims} vs {psi.layout.dims}")
    return StateVector(psi.layout, propagator(h, t) @ psi.amplitudes)


def _active_terms(
    spectators: Sequence[SpectatorCoupling],
    layout: SpaceLayout,
) -> list[_RotatingTerm]:
    return [
        (spectator_operator(spectator, layout), spectator.detuning)
        for spectator in spectators
        if spectator.strength > 0.0
    ]


def _generator_bound(base: Operator, terms: Sequence[_RotatingTerm]) -> float:
    """Upper bound on ‖H(t)‖ over all t."""
    return base.norm + sum(2.0 * float(np.linalg.norm(op, 2)) for op, _ in terms)


def _spectator_step_limit(terms: Sequence[_RotatingTerm]) -> float:
    if not terms:
        return math.inf
    fastest = max(abs(detuning) for _, detuning in terms)
    return 2.0 * math.pi / fastest / SPECTATOR_SAMPLES_PER_PERIOD


def _split(t: float, dt: float) -> tuple[int, float]:
    if dt <= 0:
        raise PreconditionError(f"time step must be positive, got {dt}")
    if t < 0:
        raise DomainError(f"evolution time must be non-negative, got {t}")
    if t == 0:
        return 0, 0.0
    steps = math.ceil(t / dt * (1.0 - 1e-12))
    return steps, t / steps


def _rotating_part(terms: Sequence[_RotatingTerm], t: float) -> ComplexArray | None:
    if not terms:
        return None
    total = None
    for op, detuning in terms:
        phase = np.exp(-1j * detuning * t)
        term = op * phase + op.conj().T * np.conj(phase)
        total = term if total is None else total + term
    return total


def _rk4(
    rhs: Callable[[ComplexArray, float], ComplexArray],
    y: ComplexArray,
    t0: float,
    steps: int,
    h: float,
    after_step: Callable[[ComplexArray], ComplexArray] | None = None,
) -> ComplexArray:
    t = t0
    for _ in range(steps):
        k1 = rhs(y, t)
        k2 = rhs(y + 0.5 * h * k1, t + 0.5 * h)
        k3 = rhs(y + 0.5 * h * k2, t + 0.5 * h)
        k4 = rhs(y + h * k3, t + h)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if after_step is not None:
            y = after_step(y)
        t += h
    return y


def schrodinger_dt(base: Operator, spectators: Sequence[SpectatorCoupling] = ()) -> float:
    """Default step for :func:`propagate_time_dependent`."""
    terms = _active_terms(spectators, base.layout)
    bound = _generator_bound(base, terms)
    limit = SCHRODINGER_STEP_FRACTION / bound if bound > 0 else math.inf
    return min(limit, _spectator_step_limit(terms))


def lindblad_dt(
    h: Operator,
    noise: NoiseModel,
    spectators: Sequence[SpectatorCoupling] = (),
) -> float:
    """Default step for :func:`evolve_lindblad`: half of its precondition bound."""
    return _lindblad_step_bound(h, noise, spectators, LINDBLAD_DEFAULT_FRACTION)


def _lindblad_step_bound(
    h: Operator,
    noise: NoiseModel,
    spectators: Sequence[SpectatorCoupling],
    fraction: float,
) -> float:
    terms = _active_terms(spectators, h.layout)
    bound = _generator_bound(h, terms)
    scales = [scale for scale in (bound, noise.max_rate) if scale > 0.0]
    limit = fraction / max(scales) if scales else math.inf
    return min(limit, _spectator_step_limit(terms))


def propagate_time_dependent(
    base: Operator,
    spectators: Sequence[SpectatorCoupling],
    psi: StateVector,
    t: float,
    dt: float,
    t0: float = 0.0,
) -> StateVector:
    """Evolve under H(t) = base + Σ g'(a⁺σ_ij⁻ e^{−iΔ't} + h.c.).

    ``t0`` is the absolute time at which the interval starts, which fixes the
    spectator phases. The norm is not renormalized; its drift is logged.
    """
    if base.layout != psi.layout:
        raise DomainError(f"layout mismatch: {base.layout.dims} vs {psi.layout.dims}")
    if not base.is_hermitian():
        raise DomainError("propagation needs a Hermitian generator")

    terms = _active_terms(spectators, psi.layout)
    if not terms:
        return propagate(base, psi, t)

    limit = _spectator_step_limit(terms)
    if dt > limit * _STEP_SLACK:
        raise PreconditionError(
            f"dt={dt:.3e} s does not resolve the fastest spectator oscillation "
            f"(need dt <= {limit:.3e} s)"
        )
    steps, h = _split(t, dt)

    static = base.matrix

    def rhs(y: ComplexArray, time: float) -> ComplexArray:
        out = static @ y
        for op, detuning in terms:
            phase = np.exp(-1j * detuning * time)
            out = out + phase * (op @ y) + np.conj(phase) * (op.conj().T @ y)
        return -1j * out

    result = _rk4(rhs, np.array(psi.amplitudes), t0, steps, h)

    drift = abs(float(np.linalg.norm(result)) - psi.norm)
    log = logger.warning if drift > NORM_DRIFT_WARNING else logger.debug
    log("norm_drift", drift=drift, steps=steps, step=h)
    return StateVector(psi.layout, result)


def evolve_lindblad(
    h: Operator,
    noise: NoiseModel,
    rho: DensityMatrix,
    t: float,
    dt: float,
    spectators: Sequence[SpectatorCoupling] = (),
    t0: float = 0.0,
) -> DensityMatrix:
    """Integrate dρ/dt = −i[H, ρ] + Σ_k (C_k ρ C_k⁺ − ½{C_k⁺C_k, ρ}).

    Requires dt ≤ 0.01·min(1/‖H‖, 1/max rate) and, with spectators, the same
    oscillation resolution as :func:`propagate_time_dependent`.
    """
    if h.layout != rho.layout:
        raise DomainError(f"layout mismatch: {h.layout.dims} vs {rho.layout.dims}")
    if not h.is_hermitian():
        raise DomainError("Lindblad evolution needs a Hermitian Hamiltonian")

    bound = _lindblad_step_bound(h, noise, spectators, LINDBLAD_STEP_FRACTION)
    if dt > bound * _STEP_SLACK:
        raise PreconditionError(f"dt={dt:.3e} s exceeds the Lindblad step bound {bound:.3e} s")
    steps, step = _split(t, dt)

    layout = rho.layout
    terms = _active_terms(spectators, layout)
    jumps = collapse_operators(noise, layout)

    drift = -1j * h.matrix
    stack = stack_dag = None
    if jumps:
        stack = np.stack(jumps)
        stack_dag = stack.conj().transpose(0, 2, 1)
        drift = drift - 0.5 * np.sum(stack_dag @ stack, axis=0)

    def rhs(y: ComplexArray, time: float) -> ComplexArray:
        k = drift
        rotating = _rotating_part(terms, time)
        if rotating is not None:
            k = k - 1j * rotating
        ky = k @ y
        out = ky + ky.conj().T
        if stack is not None:
            out = out + np.sum(stack @ y @ stack_dag, axis=0)
        return out

    def hermitize(y: ComplexArray) -> ComplexArray:
        return 0.5 * (y + y.conj().T)

    result = _rk4(rhs, np.array(rho.matrix), t0, steps, step, after_step=hermitize)
    logger.debug("lindblad_evolved", steps=steps, step=step, channels=len(jumps))
    return DensityMatrix(layout, result)
