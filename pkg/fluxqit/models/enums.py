"""Enumerations for fluxqit - all choice types defined as enums for type safety."""

from enum import Enum, IntEnum


class ExecutionMode(str, Enum):
    """How the pulse schedule is evolved."""

    IDEALIZED = "idealized"
    FULL = "full"
    OPEN = "open"


class CouplingModel(str, Enum):
    """Coherent model used underneath the open-system evolution."""

    IDEALIZED = "idealized"
    FULL = "full"


class TransferDirection(str, Enum):
    """Which qubit holds the state before the transfer."""

    FORWARD = "forward"
    REVERSE = "reverse"

    @property
    def source(self) -> int:
        """Index of the qubit the state leaves."""
        return 0 if self == TransferDirection.FORWARD else 1

    @property
    def target(self) -> int:
        """Index of the qubit the state arrives on."""
        return 1 - self.source


class SegmentKind(str, Enum):
    """Type of pulse segment."""

    DRIVE = "drive"
    CAVITY_WAIT = "cavity_wait"


class StepLabel(str, Enum):
    """The six sub-steps of the transfer recipe, in execution order."""

    STEP_1A = "1a"
    STEP_1B = "1b"
    STEP_1C = "1c"
    STEP_2A = "2a"
    STEP_2B = "2b"
    STEP_2C = "2c"

    @property
    def position(self) -> int:
        """Zero-based position in the recipe."""
        return list(StepLabel).index(self)


class RecordOption(str, Enum):
    """What execute records along the way."""

    NONE = "none"
    POPULATIONS = "populations"
    AMPLITUDES = "amplitudes"


class SweepAxis(str, Enum):
    """Parameter axes a sweep may vary."""

    OMEGA_OVER_G = "omega_over_g"
    G2_OVER_G1 = "g2_over_g1"
    GAMMA_3R = "gamma_3r"
    GAMMA_3P = "gamma_3p"
    KAPPA = "kappa"


class CardinalState(str, Enum):
    """The six standard single-qubit test inputs."""

    ZERO = "0"
    ONE = "1"
    PLUS = "+"
    MINUS = "-"
    PLUS_I = "+i"
    MINUS_I = "-i"


class ExitCode(IntEnum):
    """Process exit status of the command line."""

    OK = 0
    CONFIG_ERROR = 2
    SIMULATION_ERROR = 3


class LogLevel(str, Enum):
    """Log level."""

    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class LogFormat(str, Enum):
    """Log format."""

    JSON = "json"
    TEXT = "text"
