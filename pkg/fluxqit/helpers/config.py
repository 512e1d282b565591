"""Run documents: loading, validation and serialization of RunConfig."""

import json
import os
import re
from pathlib import Path
from typing import Annotated, Any, Literal

import yaml
from dotenv import load_dotenv
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PlainSerializer,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    field_validator,
    model_validator,
)

from fluxqit.core.analysis import cardinal_state, cavity_lifetime
from fluxqit.core.errors import ConfigError
from fluxqit.helpers.logger import get_logger
from fluxqit.models.enums import (
    CardinalState,
    CouplingModel,
    ExecutionMode,
    LogFormat,
    LogLevel,
    StepLabel,
    SweepAxis,
    TransferDirection,
)
from fluxqit.models.physics import BRANCHING_ATOL, NoiseModel, SpectatorCoupling
from fluxqit.models.reports import INPUT_NORM_ATOL, InputState, TransferParams
from fluxqit.models.space import DEFAULT_N_MAX

logger = get_logger("config")

SCHEMA_VERSION = 1


def _parse_complex(value: Any) -> Any:
    """Accept 0.6, "0.8i", "0.6+0.8j" or [re, im]."""
    if isinstance(value, str):
        text = value.replace(" ", "").replace("i", "j")
        if text in ("j", "+j", "-j"):
            text = text.replace("j", "1j")
        try:
            return complex(text)
        except ValueError:
            raise ValueError(f"'{value}' is not a complex number") from None
    if isinstance(value, list | tuple):
        if len(value) != 2:
            raise ValueError(f"complex pair needs [re, im], got {value}")
        return complex(float(value[0]), float(value[1]))
    return value


ComplexValue = Annotated[
    complex,
    BeforeValidator(_parse_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list[float]),
]


class InputConfig(BaseModel):
    """Explicit α|0⟩ + β|1⟩ input."""

    model_config = ConfigDict(extra="forbid")

    label: str | None = None
    alpha: ComplexValue
    beta: ComplexValue

    @model_validator(mode="after")
    def _normalized(self) -> "InputConfig":
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > INPUT_NORM_ATOL:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm:.12f} must equal 1")
        return self


# (rate field, lifetime field) per decay channel
NOISE_CHANNELS = (
    ("gamma_3r", "t1_3"),
    ("gamma_3p", "t_phi_3"),
    ("kappa", "t_cavity"),
    ("gamma_2r", "t1_2"),
    ("gamma_1r", "t1_1"),
)


class NoiseConfig(BaseModel):
    """Decay channels, each given either as a rate (rad/s) or a lifetime (s)."""

    model_config = ConfigDict(extra="forbid")

    gamma_3r: NonNegativeFloat | None = None
    t1_3: PositiveFloat | None = None
    gamma_3p: NonNegativeFloat | None = None
    t_phi_3: PositiveFloat | None = None
    kappa: NonNegativeFloat | None = None
    t_cavity: PositiveFloat | None = None
    gamma_2r: NonNegativeFloat | None = None
    t1_2: PositiveFloat | None = None
    gamma_1r: NonNegativeFloat | None = None
    t1_1: PositiveFloat | None = None
    branch_3_to_2: NonNegativeFloat = 1.0
    branch_3_to_1: NonNegativeFloat = 0.0
    branch_3_to_0: NonNegativeFloat = 0.0

    @model_validator(mode="after")
    def _one_form_per_channel(self) -> "NoiseConfig":
        for rate, lifetime in NOISE_CHANNELS:
            if getattr(self, rate) is not None and getattr(self, lifetime) is not None:
                raise ValueError(
                    f"channel {rate} is given both as a rate and as lifetime {lifetime}; "
                    "use one of them"
                )
        total = self.branch_3_to_2 + self.branch_3_to_1 + self.branch_3_to_0
        if abs(total - 1.0) > BRANCHING_ATOL:
            raise ValueError(f"branch_3_to_* fractions sum to {total}, expected 1")
        return self

    def rate(self, channel: str) -> float | None:
        """Rate of ``channel`` in rad/s, converted from its lifetime if needed."""
        lifetime = dict(NOISE_CHANNELS)[channel]
        value = getattr(self, channel)
        if value is not None:
            return float(value)
        given = getattr(self, lifetime)
        return 1.0 / given if given is not None else None

    def to_noise_model(self, kappa: float | None = None) -> NoiseModel:
        """NoiseModel with lifetimes converted; ``kappa`` fills an unset cavity channel."""
        rates = {channel: self.rate(channel) for channel, _ in NOISE_CHANNELS}
        if rates["kappa"] is None and kappa is not None:
            rates["kappa"] = kappa
        return NoiseModel(
            **{channel: value or 0.0 for channel, value in rates.items()},
            branch_3_to_2=self.branch_3_to_2,
            branch_3_to_1=self.branch_3_to_1,
            branch_3_to_0=self.branch_3_to_0,
        )


class CavityConfig(BaseModel):
    """Resonator figures used by the budget and, in open mode, for κ."""

    model_config = ConfigDict(extra="forbid")

    q_factor: PositiveFloat | None = None
    nu_c: PositiveFloat | None = None


class IntegratorConfig(BaseModel):
    """Integrator settings."""

    model_config = ConfigDict(extra="forbid")

    dt: PositiveFloat | None = None


class LoggingConfig(BaseModel):
    """Logging configuration."""

    model_config = ConfigDict(extra="forbid")

    level: LogLevel = LogLevel.WARNING
    format: LogFormat = LogFormat.TEXT
    file: str | None = None
    max_size_mb: PositiveInt = 20
    backup_count: int = Field(default=3, ge=0)


def _default_inputs() -> list["CardinalState | InputConfig"]:
    return list(CardinalState)


class RunConfig(BaseModel):
    """A validated run document."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(alias="schema")
    g1: PositiveFloat
    g2: PositiveFloat
    omega: PositiveFloat
    n_max: int = Field(default=DEFAULT_N_MAX, ge=1)
    mode: ExecutionMode = ExecutionMode.IDEALIZED
    open_coupling: CouplingModel = CouplingModel.FULL
    direction: TransferDirection = TransferDirection.FORWARD
    rabi_overrides: dict[StepLabel, PositiveFloat] = Field(default_factory=dict)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    cavity: CavityConfig = Field(default_factory=CavityConfig)
    inputs: list[CardinalState | InputConfig] = Field(default_factory=_default_inputs, min_length=1)
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)
    spectators: list[SpectatorCoupling] = Field(default_factory=list)
    trace: bool = False
    grid: dict[SweepAxis, list[float]] = Field(default_factory=dict)
    workers: PositiveInt | None = None
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @field_validator("inputs", mode="before")
    @classmethod
    def _labels_as_text(cls, value: Any) -> Any:
        # YAML reads the bare labels 0 and 1 as integers
        if isinstance(value, list):
            return [str(item) if isinstance(item, int) else item for item in value]
        return value

    @field_validator("grid")
    @classmethod
    def _non_empty_axes(cls, value: dict[SweepAxis, list[float]]) -> dict[SweepAxis, list[float]]:
        for axis, values in value.items():
            if not values:
                raise ValueError(f"grid axis {axis.value} has no values")
        return value

    @property
    def derived_kappa(self) -> float | None:
        """κ from the resonator figures, used in open mode when no cavity rate is set."""
        q_factor, nu_c = self.cavity.q_factor, self.cavity.nu_c
        if self.mode != ExecutionMode.OPEN or q_factor is None or nu_c is None:
            return None
        if self.noise.rate("kappa") is not None:
            return None
        return 1.0 / cavity_lifetime(q_factor, nu_c)

    def noise_model(self) -> NoiseModel:
        return self.noise.to_noise_model(kappa=self.derived_kappa)

    def input_states(self) -> list[InputState]:
        states = []
        for index, item in enumerate(self.inputs):
            if isinstance(item, InputConfig):
                label = item.label or f"input{index}"
                states.append(InputState(label=label, alpha=item.alpha, beta=item.beta))
            else:
                states.append(cardinal_state(item))
        return states

    def transfer_params(self) -> TransferParams:
        return TransferParams(
            g1=self.g1,
            g2=self.g2,
            omega=self.omega,
            mode=self.mode,
            open_coupling=self.open_coupling,
            noise=self.noise_model(),
            spectators=tuple(self.spectators),
            n_max=self.n_max,
            dt=self.integrator.dt,
            direction=self.direction,
            rabi_overrides=dict(self.rabi_overrides),
        )

    def canonical_json(self) -> str:
        """Single-line JSON of the full parameter set, stable across runs."""
        return json.dumps(
            self.model_dump(mode="json", by_alias=True),
            sort_keys=True,
            separators=(",", ":"),
        )


def _expand_env_vars(value: Any) -> Any:
    """Recursively expand environment variables in config values."""
    if isinstance(value, str):
        pattern = r"\$\{([^}]+)\}"
        for match in re.findall(pattern, value):
            value = value.replace(f"${{{match}}}", os.environ.get(match, ""))
        return value
    elif isinstance(value, dict):
        return {k: _expand_env_vars(v) for k, v in value.items()}
    elif isinstance(value, list):
        return [_expand_env_vars(item) for item in value]
    return value


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(part) for part in item["loc"]) or "document"
        parts.append(f"{where}: {item['msg']}")
    return "; ".join(parts)


def parse_config(document: str) -> RunConfig:
    """Parse a YAML run document into a RunConfig.

    Raises:
        ConfigError: malformed YAML, unknown keys, a missing schema version
            or any violated constraint
    """
    try:
        raw = yaml.safe_load(document)
    except yaml.YAMLError as e:
        raise ConfigError(f"run document is not valid YAML: {e}") from e

    if not isinstance(raw, dict):
        raise ConfigError("run document must be a mapping of keys to values")
    if "schema" not in raw:
        raise ConfigError(f"run document needs a 'schema: {SCHEMA_VERSION}' entry")

    try:
        config = RunConfig.model_validate(_expand_env_vars(raw))
        # build the derived records once so inconsistent documents fail here
        config.transfer_params()
        config.input_states()
    except ValidationError as e:
        raise ConfigError(_describe(e)) from e

    return config


def load_config(
    config_path: str | Path,
    env_path: str | Path | None = ".env",
) -> RunConfig:
    """Load a run document from disk.

    Args:
        config_path: Path to the YAML run document
        env_path: Path to a .env file read before ``${VAR}`` expansion (optional)

    Returns:
        Validated RunConfig
    """
    if env_path:
        env_file = Path(env_path)
        if env_file.exists():
            load_dotenv(env_file)

    config_file = Path(config_path)
    if not config_file.exists():
        raise ConfigError(f"config file not found: {config_file}")

    config = parse_config(config_file.read_text(encoding="utf-8"))
    logger.info("config_loaded", path=str(config_file), mode=config.mode.value)
    return config


def dump_config(config: RunConfig) -> str:
    """Serialize a RunConfig; :func:`parse_config` reads it back to an equal config."""
    return yaml.safe_dump(config.model_dump(mode="json", by_alias=True), sort_keys=False)
