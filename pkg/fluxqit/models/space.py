"""Hilbert-space records for fluxqit: layouts, states and operators.

All records are immutable after construction: the wrapped numpy arrays are
copied and flagged read-only, so instances can be shared between sweep
workers without copying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fluxqit.core.errors import DomainError

QUBIT_LEVELS = 4
DEFAULT_N_MAX = 2
MAX_SUBSYSTEMS = 3

NORM_ATOL = 1e-10
HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-9
EIGENVALUE_ATOL = 1e-9

ComplexArray = NDArray[np.complex128]


def _frozen(values: ArrayLike, shape: tuple[int, ...], what: str) -> ComplexArray:
    array = np.array(values, dtype=np.complex128)
    if array.shape != shape:
        raise DomainError(f"{what} has shape {array.shape}, expected {shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered subsystem dimensions of the composite space.

    The transfer protocol uses (qubit1, qubit2, cavity) = (4, 4, n_max + 1);
    smaller layouts are accepted for reduced states and unit checks.
    Basis indices are row-major over ``dims``.
    """

    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)

        if not 1 <= len(dims) <= MAX_SUBSYSTEMS:
            raise DomainError(
                f"a layout holds 1 to {MAX_SUBSYSTEMS} subsystems, got {len(dims)}"
            )
        for index, dim in enumerate(dims):
            if dim < 2:
                raise DomainError(f"subsystem {index} has dimension {dim}, minimum is 2")
        if len(dims) == MAX_SUBSYSTEMS and dims[:2] != (QUBIT_LEVELS, QUBIT_LEVELS):
            raise DomainError(f"qubit subsystems must have {QUBIT_LEVELS} levels, got {dims[:2]}")

    @classmethod
    def qit(cls, n_max: int = DEFAULT_N_MAX) -> SpaceLayout:
        """Layout of two four-level qubits sharing a cavity truncated at ``n_max`` photons."""
        if n_max < 1:
            raise DomainError(f"cavity truncation n_max must be at least 1, got {n_max}")
        return cls((QUBIT_LEVELS, QUBIT_LEVELS, n_max + 1))

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    @property
    def is_qit(self) -> bool:
        """True for the (4, 4, n_max + 1) protocol layout."""
        return self.n_subsystems == MAX_SUBSYSTEMS

    @property
    def cavity(self) -> int:
        """Index of the cavity subsystem (always the last one)."""
        return self.n_subsystems - 1

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_subsystems - 1))

    @property
    def n_max(self) -> int:
        return self.dims[-1] - 1

    def subsystem_name(self, index: int) -> str:
        if self.is_qit:
            return ("qubit1", "qubit2", "cavity")[index]
        return f"subsystem {index}"

    def check_subsystem(self, index: int) -> None:
        if not 0 <= index < self.n_subsystems:
            raise DomainError(f"subsystem index {index} outside layout {self.dims}")

    def index_of(self, labels: tuple[int, ...]) -> int:
        """Row-major basis index of a label tuple."""
        if len(labels) != self.n_subsystems:
            raise DomainError(f"expected {self.n_subsystems} labels, got {len(labels)}")
        for index, (label, dim) in enumerate(zip(labels, self.dims, strict=True)):
            if not 0 <= label < dim:
                raise DomainError(
                    f"label {label} out of range for {self.subsystem_name(index)} "
                    f"(dimension {dim})"
                )
        return int(np.ravel_multi_index(tuple(labels), self.dims))

    def labels_of(self, index: int) -> tuple[int, ...]:
        """Inverse of :meth:`index_of`."""
        if not 0 <= index < self.total_dim:
            raise DomainError(f"basis index {index} outside 0..{self.total_dim - 1}")
        return tuple(int(k) for k in np.unravel_index(index, self.dims))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state over a layout."""

    layout: SpaceLayout
    amplitudes: ComplexArray

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "amplitudes",
            _frozen(self.amplitudes, (self.layout.total_dim,), "state vector"),
        )

    @classmethod
    def from_amplitudes(
        cls,
        layout: SpaceLayout,
        amplitudes: ArrayLike,
        normalize: bool = True,
    ) -> StateVector:
        """Build a state, normalizing it unless told otherwise."""
        vector = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if normalize:
            norm = np.linalg.norm(vector)
            if norm == 0.0:
                raise DomainError("cannot normalize the zero vector")
            vector = vector / norm
        return cls(layout, vector)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, atol: float = NORM_ATOL) -> bool:
        return abs(self.norm - 1.0) <= atol

    def with_phase(self, theta: float) -> StateVector:
        """The same ray multiplied by e^{i theta}."""
        return StateVector(self.layout, self.amplitudes * np.exp(1j * theta))

    def probabilities(self) -> NDArray[np.float64]:
        return np.abs(self.amplitudes) ** 2

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(self.layout, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state over a layout.

    Hermiticity and unit trace are checked on construction; positivity is
    checked on demand by :meth:`validate` since it needs an eigendecomposition.
    """

    layout: SpaceLayout
    matrix: ComplexArray

    def __post_init__(self) -> None:
        dim = self.layout.total_dim
        matrix = _frozen(self.matrix, (dim, dim), "density matrix")
        object.__setattr__(self, "matrix", matrix)

        deviation = float(np.max(np.abs(matrix - matrix.conj().T)))
        if deviation > HERMITIAN_ATOL:
            raise DomainError(f"density matrix not Hermitian (deviation {deviation:.3e})")
        trace = np.trace(matrix)
        if abs(trace - 1.0) > TRACE_ATOL:
            raise DomainError(f"density matrix trace is {trace.real:.12f}, expected 1")

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def validate(self, eig_tol: float = EIGENVALUE_ATOL) -> None:
        """Raise DomainError unless the matrix is positive semidefinite within ``eig_tol``."""
        lowest = self.min_eigenvalue
        if lowest < -eig_tol:
            raise DomainError(f"density matrix has eigenvalue {lowest:.3e} below -{eig_tol:.0e}")

    def probabilities(self) -> NDArray[np.float64]:
        return np.real(np.diag(self.matrix)).copy()


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator tagged with its layout.

    ``hermitian=True`` asserts Hermiticity, checked relative to the largest
    entry so that Hamiltonians in rad/s pass the same test as unit matrices.
    """

    layout: SpaceLayout
    matrix: ComplexArray
    hermitian: bool = False

    def __post_init__(self) -> None:
        dim = self.layout.total_dim
        object.__setattr__(self, "matrix", _frozen(self.matrix, (dim, dim), "operator"))
        if self.hermitian and not self.is_hermitian():
            raise DomainError("operator flagged Hermitian is not")

    def is_hermitian(self, rtol: float = HERMITIAN_ATOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) <= rtol * scale

    @property
    def norm(self) -> float:
        """Spectral norm."""
        return float(np.linalg.norm(self.matrix, 2))

    def _check_layout(self, other: SpaceLayout) -> None:
        if other != self.layout:
            raise DomainError(f"layout mismatch: {self.layout.dims} vs {other.dims}")

    def __add__(self, other: Operator) -> Operator:
        self._check_layout(other.layout)
        return Operator(
            self.layout,
            self.matrix + other.matrix,
            hermitian=self.hermitian and other.hermitian,
        )

    def __matmul__(self, other: Operator) -> Operator:
        self._check_layout(other.layout)
        return Operator(self.layout, self.matrix @ other.matrix)

    def scaled(self, factor: complex) -> Operator:
        return Operator(
            self.layout,
            self.matrix * factor,
            hermitian=self.hermitian and complex(factor).imag == 0.0,
        )

    def commutator(self, other: Operator) -> Operator:
        return self @ other + (other @ self).scaled(-1.0)

    def apply(self, psi: StateVector) -> StateVector:
        self._check_layout(psi.layout)
        return StateVector(self.layout, self.matrix @ psi.amplitudes)
