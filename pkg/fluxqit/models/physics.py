"""Physical parameter records: couplings, drives and noise.

Units: ħ = 1, every rate and coupling is an angular frequency in rad/s, times are seconds.
"""

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, model_validator

from fluxqit.models.space import QUBIT_LEVELS

RESONANT_TRANSITION = (2, 3)
BRANCHING_ATOL = 1e-9


def _check_transition(transition: tuple[int, int]) -> None:
    lower, upper = transition
    if not 0 <= lower < upper < QUBIT_LEVELS:
        raise ValueError(
            f"transition {transition} must be (i, j) with 0 <= i < j <= {QUBIT_LEVELS - 1}"
        )


class JcCoupling(BaseModel):
    """Resonant coupling g(a⁺σ₂₃⁻ + h.c.) between one qubit and the cavity."""

    model_config = ConfigDict(frozen=True)

    qubit: int = Field(ge=0, le=1)
    g: PositiveFloat


class DriveSpec(BaseModel):
    """Classical pulse Ω(e^{iφ}|i⟩⟨j| + h.c.) on one qubit transition, i the lower level."""

    model_config = ConfigDict(frozen=True)

    qubit: int = Field(ge=0, le=1)
    transition: tuple[int, int]
    rabi: PositiveFloat
    phase: float = 0.0

    @model_validator(mode="after")
    def _ordered_levels(self) -> "DriveSpec":
        _check_transition(self.transition)
        return self


class SpectatorCoupling(BaseModel):
    """Off-resonant cavity coupling g'(a⁺σ_ij⁻ e^{−iΔ't} + h.c.) of a non-(2,3) transition.

    ``detuning`` is the transition frequency minus the cavity frequency.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    qubit: int = Field(ge=0, le=1)
    transition: tuple[int, int]
    strength: NonNegativeFloat
    detuning: float

    @model_validator(mode="after")
    def _off_resonant(self) -> "SpectatorCoupling":
        _check_transition(self.transition)
        if self.transition == RESONANT_TRANSITION:
            raise ValueError("the (2, 3) transition is the resonant one, not a spectator")
        if self.detuning == 0.0:
            raise ValueError("spectator detuning must be non-zero")
        return self


class NoiseModel(BaseModel):
    """Markovian decay and dephasing rates.

    Level |3⟩ relaxes with rate ``gamma_3r`` split over |2⟩, |1⟩ and |0⟩ by the
    branching fractions; |2⟩ relaxes to |1⟩ and |1⟩ to |0⟩ with their own slow
    rates. ``gamma_3p`` is the decay rate of the coherences ⟨3|ρ|k⟩.
    """

    model_config = ConfigDict(frozen=True)

    gamma_3r: NonNegativeFloat = 0.0
    gamma_3p: NonNegativeFloat = 0.0
    kappa: NonNegativeFloat = 0.0
    gamma_2r: NonNegativeFloat = 0.0
    gamma_1r: NonNegativeFloat = 0.0
    branch_3_to_2: NonNegativeFloat = 1.0
    branch_3_to_1: NonNegativeFloat = 0.0
    branch_3_to_0: NonNegativeFloat = 0.0

    @model_validator(mode="after")
    def _branching_sums_to_one(self) -> "NoiseModel":
        total = self.branch_3_to_2 + self.branch_3_to_1 + self.branch_3_to_0
        if abs(total - 1.0) > BRANCHING_ATOL:
            raise ValueError(f"relaxation branching fractions sum to {total}, expected 1")
        return self

    @property
    def max_rate(self) -> float:
        return max(self.gamma_3r, self.gamma_3p, self.kappa, self.gamma_2r, self.gamma_1r)

    @property
    def is_silent(self) -> bool:
        return self.max_rate == 0.0
