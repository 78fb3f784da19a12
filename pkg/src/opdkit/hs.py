"""Dense Hilbert-Schmidt operator utilities.

Single-party operators are plain ``numpy`` arrays of shape ``(d, d)``.
Bipartite operators carry their factor dimensions in :class:`BipartiteOperator`;
the joint index is S-major, i.e. ``row = s * dim_e + e``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when operator dimensions do not match or do not factor."""


def as_operator(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class BipartiteOperator:
    """Operator on H_S (x) H_E stored as a ``(dim_s*dim_e)``-square matrix."""

    matrix: np.ndarray
    dim_s: int
    dim_e: int

    def __post_init__(self):
        m = as_operator(self.matrix)
        if self.dim_s < 1 or self.dim_e < 1:
            raise DimensionError("factor dimensions must be positive")
        if m.shape[0] != self.dim_s * self.dim_e:
            raise DimensionError(
                f"matrix of size {m.shape[0]} does not factor as "
                f"{self.dim_s} x {self.dim_e}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.dim_s * self.dim_e

    def as_tensor(self) -> np.ndarray:
        """View as a rank-4 tensor ``T[s, e, s', e']``."""
        return self.matrix.reshape(self.dim_s, self.dim_e, self.dim_s, self.dim_e)

    def __add__(self, other: "BipartiteOperator") -> "BipartiteOperator":
        _check_same_dims(self, other)
        return BipartiteOperator(self.matrix + other.matrix, self.dim_s, self.dim_e)

    def __sub__(self, other: "BipartiteOperator") -> "BipartiteOperator":
        _check_same_dims(self, other)
        return BipartiteOperator(self.matrix - other.matrix, self.dim_s, self.dim_e)

    def __mul__(self, scalar) -> "BipartiteOperator":
        return BipartiteOperator(scalar * self.matrix, self.dim_s, self.dim_e)

    __rmul__ = __mul__

    def __radd__(self, other) -> "BipartiteOperator":
        # lets sum() start from 0
        if isinstance(other, (int, float)) and other == 0:
            return self
        return NotImplemented


def _check_same_dims(a: BipartiteOperator, b: BipartiteOperator) -> None:
    if (a.dim_s, a.dim_e) != (b.dim_s, b.dim_e):
        raise DimensionError(
            f"bipartite dims differ: {(a.dim_s, a.dim_e)} vs {(b.dim_s, b.dim_e)}"
        )


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt scalar product ``Tr[A^dagger B]``."""
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.linalg.norm(as_operator(a)))


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def tensor(a, b) -> BipartiteOperator:
    a = as_operator(a)
    b = as_operator(b)
    return BipartiteOperator(np.kron(a, b), a.shape[0], b.shape[0])


def partial_trace_e(op: BipartiteOperator) -> np.ndarray:
    return np.einsum("aebe->ab", op.as_tensor())


def partial_trace_s(op: BipartiteOperator) -> np.ndarray:
    return np.einsum("sasb->ab", op.as_tensor())


def apply_local_s(op: BipartiteOperator, a) -> np.ndarray:
    """``Tr_S[(A (x) 1) O]`` as an operator on H_E."""
    a = as_operator(a)
    if a.shape[0] != op.dim_s:
        raise DimensionError("local operator does not act on the S factor")
    # (A (x) 1) O summed over the S diagonal: sum_{s,s'} A[s', s] O[s e, s' e']
    return np.einsum("ts,sbtc->bc", a, op.as_tensor())


def hermitian_part(a) -> np.ndarray:
    a = as_operator(a)
    return 0.5 * (a + dagger(a))


def min_eigenvalue(a) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(a))[0])


def is_hermitian(a, tol: float = DEFAULT_TOL) -> bool:
    a = as_operator(a)
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def is_positive(a, tol: float = DEFAULT_TOL) -> bool:
    return is_hermitian(a, tol) and min_eigenvalue(a) >= -tol


def is_density(a, tol: float = DEFAULT_TOL) -> bool:
    a = as_operator(a)
    return is_positive(a, tol) and abs(np.trace(a) - 1.0) <= tol


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def bell_state() -> BipartiteOperator:
    """The projector onto ``(|00> + |11>)/sqrt(2)``."""
    psi = (ket(0, 4) + ket(3, 4)) / np.sqrt(2)
    return BipartiteOperator(projector(psi), 2, 2)


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
SIGMA = (PAULI["I"], PAULI["X"], PAULI["Y"], PAULI["Z"])


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the Ginibre ensemble (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (g + dagger(g))
