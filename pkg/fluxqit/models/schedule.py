"""Pulse schedule models."""

from typing import Annotated, Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from fluxqit.models.enums import StepLabel, TransferDirection
from fluxqit.models.physics import DriveSpec


class DriveSegment(BaseModel):
    """Rectangular classical pulses applied simultaneously for one duration."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["drive"] = "drive"
    label: StepLabel | None = None
    drives: list[DriveSpec] = Field(min_length=1)
    duration: PositiveFloat

    @model_validator(mode="after")
    def _disjoint_levels(self) -> "DriveSegment":
        addressed: set[tuple[int, int]] = set()
        for drive in self.drives:
            for level in drive.transition:
                key = (drive.qubit, level)
                if key in addressed:
                    raise ValueError(
                        f"two drives address level {level} of qubit {drive.qubit} "
                        "in the same segment"
                    )
                addressed.add(key)
        return self


class CavityWaitSegment(BaseModel):
    """Free evolution while ``qubit`` exchanges its excitation with the cavity."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["cavity_wait"] = "cavity_wait"
    label: StepLabel | None = None
    qubit: int = Field(ge=0, le=1)
    duration: PositiveFloat


PulseSegment = Annotated[DriveSegment | CavityWaitSegment, Field(discriminator="kind")]


class Schedule(BaseModel):
    """Ordered pulse segments plus the parameters they were built from."""

    model_config = ConfigDict(frozen=True)

    segments: list[PulseSegment] = Field(min_length=1)
    g1: PositiveFloat
    g2: PositiveFloat
    omega: PositiveFloat
    direction: TransferDirection = TransferDirection.FORWARD

    @property
    def total_duration(self) -> float:
        return sum(segment.duration for segment in self.segments)

    def boundaries(self) -> list[float]:
        """Start time of every segment followed by the end time of the last one."""
        times = [0.0]
        for segment in self.segments:
            times.append(times[-1] + segment.duration)
        return times

    def to_document(self) -> str:
        """Render the schedule as a YAML document."""
        data: dict[str, Any] = self.model_dump(mode="json")
        return yaml.safe_dump(data, sort_keys=False)

    @classmethod
    def from_document(cls, text: str) -> "Schedule":
        """Read a schedule written by :meth:`to_document`."""
        return cls.model_validate(yaml.safe_load(text))
