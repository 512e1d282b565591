"""Tensor-product algebra over a SpaceLayout: kets, embeddings, ladder operators, traces."""

from __future__ import annotations

from collections.abc import Iterable
from functools import reduce

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fluxqit.core.errors import DomainError
from fluxqit.models.space import (
    QUBIT_LEVELS,
    ComplexArray,
    DensityMatrix,
    Operator,
    SpaceLayout,
    StateVector,
)

_EINSUM_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def basis_state(layout: SpaceLayout, labels: tuple[int, ...]) -> StateVector:
    """Unit ket with amplitude 1 at the row-major index of ``labels``."""
    amplitudes = np.zeros(layout.total_dim, dtype=np.complex128)
    amplitudes[layout.index_of(tuple(labels))] = 1.0
    return StateVector(layout, amplitudes)


def identity(layout: SpaceLayout) -> Operator:
    return Operator(layout, np.eye(layout.total_dim, dtype=np.complex128), hermitian=True)


def embed(local: ArrayLike, subsystem: int, layout: SpaceLayout) -> Operator:
    """Lift a single-subsystem matrix to I ⊗ … ⊗ local ⊗ … ⊗ I."""
    layout.check_subsystem(subsystem)
    matrix = np.asarray(local, dtype=np.complex128)
    dim = layout.dims[subsystem]
    if matrix.shape != (dim, dim):
        raise DomainError(
            f"local operator is {matrix.shape}, {layout.subsystem_name(subsystem)} "
            f"needs {dim}x{dim}"
        )

    factors = [
        matrix if index == subsystem else np.eye(d, dtype=np.complex128)
        for index, d in enumerate(layout.dims)
    ]
    return Operator(layout, reduce(np.kron, factors))


def annihilation(n_max: int) -> ComplexArray:
    """Truncated photon annihilation operator, a|n⟩ = √n |n−1⟩."""
    if n_max < 1:
        raise DomainError(f"n_max must be at least 1 for cavity dynamics, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(np.complex128)


def creation(n_max: int) -> ComplexArray:
    return annihilation(n_max).conj().T


def sigma(i: int, j: int) -> ComplexArray:
    """Four-level transition operator |i⟩⟨j|; sigma(2, 3) lowers |3⟩ to |2⟩."""
    for level in (i, j):
        if not 0 <= level < QUBIT_LEVELS:
            raise DomainError(f"qubit level {level} outside 0..{QUBIT_LEVELS - 1}")
    matrix = np.zeros((QUBIT_LEVELS, QUBIT_LEVELS), dtype=np.complex128)
    matrix[i, j] = 1.0
    return matrix


def projector(layout: SpaceLayout, subsystem: int, level: int) -> Operator:
    """|level⟩⟨level| on one subsystem."""
    layout.check_subsystem(subsystem)
    dim = layout.dims[subsystem]
    if not 0 <= level < dim:
        raise DomainError(f"level {level} out of range for {layout.subsystem_name(subsystem)}")
    local = np.zeros((dim, dim), dtype=np.complex128)
    local[level, level] = 1.0
    return Operator(layout, embed(local, subsystem, layout).matrix, hermitian=True)


def number_operator(layout: SpaceLayout) -> Operator:
    """Photon number a⁺a on the cavity."""
    a = annihilation(layout.n_max)
    return Operator(layout, embed(a.conj().T @ a, layout.cavity, layout).matrix, hermitian=True)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """⟨a|b⟩, conjugate-linear in ``a``."""
    if a.layout != b.layout:
        raise DomainError(f"layout mismatch: {a.layout.dims} vs {b.layout.dims}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix over the subsystems in ``keep``."""
    kept = sorted(set(keep))
    if not kept:
        raise DomainError("partial trace needs at least one subsystem to keep")
    for index in kept:
        rho.layout.check_subsystem(index)

    dims = rho.layout.dims
    n = len(dims)
    rows = _EINSUM_LETTERS[:n]
    cols = "".join(
        rows[index] if index not in kept else _EINSUM_LETTERS[n + index] for index in range(n)
    )
    out = "".join(rows[index] for index in kept) + "".join(cols[index] for index in kept)

    tensor = rho.matrix.reshape(dims + dims)
    reduced = np.einsum(f"{rows}{cols}->{out}", tensor)

    kept_layout = SpaceLayout(tuple(dims[index] for index in kept))
    size = kept_layout.total_dim
    return DensityMatrix(kept_layout, reduced.reshape(size, size))


def marginal_populations(
    layout: SpaceLayout,
    probabilities: NDArray[np.float64],
) -> list[NDArray[np.float64]]:
    """Per-subsystem level populations from a diagonal over the full basis."""
    tensor = probabilities.reshape(layout.dims)
    marginals = []
    for index in range(layout.n_subsystems):
        others = tuple(axis for axis in range(layout.n_subsystems) if axis != index)
        marginals.append(tensor.sum(axis=others))
    return marginals
