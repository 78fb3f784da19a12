"""Operator Schmidt decomposition by realignment."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import from_coefficients, hermitian_basis
from .hs import BipartiteOperator

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    coefficients: np.ndarray  # descending, all > tol * max
    system_ops: np.ndarray  # (rank, dim_s, dim_s)
    env_ops: np.ndarray  # (rank, dim_e, dim_e)
    tolerance: float

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> BipartiteOperator:
        ds, de = self.system_ops.shape[1], self.env_ops.shape[1]
        m = np.einsum("k,kab,kcd->acbd", self.coefficients, self.system_ops, self.env_ops)
        return BipartiteOperator(m.reshape(ds * de, ds * de), ds, de)


def realign(op: BipartiteOperator) -> np.ndarray:
    """Coefficient matrix ``C[a, b] = Tr[(B_a (x) B_b) O]`` in the Hermitian bases.

    Rows index ``hermitian_basis(dim_s)``, columns ``hermitian_basis(dim_e)``;
    ``O = sum_ab C[a, b] B_a (x) B_b`` and ``C`` is real whenever ``O`` is Hermitian.
    """
    bs = hermitian_basis(op.dim_s)
    be = hermitian_basis(op.dim_e)
    # Tr[(A (x) B) O] = sum A[s, s'] B[e, e'] O[s' e', s e]
    return np.einsum("atu,bvw,uwtv->ab", bs, be, op.as_tensor())


def schmidt_decompose(op: BipartiteOperator, tol: float = DEFAULT_RANK_TOL) -> SchmidtDecomposition:
    """Operator Schmidt decomposition ``O = sum_k s_k G_k^S (x) G_k^E``.

    A singular value is kept when it exceeds ``tol`` times the largest one.
    For Hermitian ``O`` the realigned matrix is real and every ``G_k`` is
    Hermitian, so ``s_k G_k^E = Tr_S[(G_k^S (x) 1) O]``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = realign(op)
    if np.allclose(c.imag, 0.0, atol=1e-13 * max(1.0, np.abs(c).max(initial=0.0))):
        c = c.real
    u, s, vh = np.linalg.svd(c)
    smax = s[0] if s.size else 0.0
    keep = int(np.sum(s > tol * smax)) if smax > 0 else 0
    gs = from_coefficients(u[:, :keep].T, hermitian_basis(op.dim_s))
    ge = from_coefficients(vh[:keep], hermitian_basis(op.dim_e))
    return SchmidtDecomposition(s[:keep].copy(), gs, ge, tol)


def schmidt_rank(op: BipartiteOperator, tol: float = DEFAULT_RANK_TOL) -> int:
    return schmidt_decompose(op, tol).rank
