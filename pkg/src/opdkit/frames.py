"""Operator frames on L2(H_S).

Frame elements are stacked into arrays of shape ``(n, d, d)``. Labels are
1-based pairs ``(k, j)`` in canonical order: diagonal pairs
``(1, 1), ..., (d, d)`` first, then off-diagonal pairs in lexicographic order.

Off-diagonal Hermitian basis elements follow the convention

    b_kj = (|k><j| + |j><k|) / sqrt(2)          k > j
    b_kj = -i (|k><j| - |j><k|) / sqrt(2)       k < j

so that for a qubit ``b_21 = sigma_x / sqrt(2)`` and ``b_12 = sigma_y / sqrt(2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .hs import DimensionError, as_operator

SINGULAR_TOL = 1e-12


class NotAFrameError(ValueError):
    """The family does not span L2(H): its frame map is singular."""


def canonical_labels(d: int) -> list[tuple[int, int]]:
    diag = [(k, k) for k in range(1, d + 1)]
    off = [(k, j) for k in range(1, d + 1) for j in range(1, d + 1) if k != j]
    return diag + off


def _offdiag(k: int, j: int, d: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    a, b = k - 1, j - 1
    if k > j:
        m[a, b] = m[b, a] = 1.0
    else:
        m[a, b] = -1j
        m[b, a] = 1j
    return m / np.sqrt(2)


def _diag_h(k: int, d: int) -> np.ndarray:
    """Generalized Pauli diagonal element h_k (1-based)."""
    if k == 1:
        return np.eye(d, dtype=complex) / np.sqrt(d)
    diag = np.zeros(d)
    diag[: k - 1] = 1.0
    diag[k - 1] = 1.0 - k
    return np.diag(diag).astype(complex) / np.sqrt(k * (k - 1))


def gellmann_basis(d: int) -> np.ndarray:
    """Orthonormal generalized Gell-Mann basis, shape ``(d*d, d, d)``.

    The first ``d`` entries are the diagonal elements ``h_1 = 1/sqrt(d)``,
    ``h_2, ..., h_d``; the rest are the off-diagonal ``f_kj`` in canonical order.
    """
    if d < 2:
        raise ValueError("Gell-Mann basis needs d >= 2")
    out = [_diag_h(k, d) for k in range(1, d + 1)]
    out += [_offdiag(k, j, d) for k, j in canonical_labels(d)[d:]]
    return np.array(out)


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal Hermitian basis with ``|k><k|`` on the diagonal labels."""
    if d < 1:
        raise ValueError("dimension must be positive")
    out = []
    for k, j in canonical_labels(d):
        if k == j:
            m = np.zeros((d, d), dtype=complex)
            m[k - 1, k - 1] = 1.0
            out.append(m)
        else:
            out.append(_offdiag(k, j, d))
    return np.array(out)


def coefficients(ops, basis) -> np.ndarray:
    """Expansion coefficients ``C[a, i] = (E_i, A_a)`` of ``ops`` in ``basis``."""
    return np.einsum("iab,nab->ni", np.conj(basis), np.asarray(ops))


def from_coefficients(coeffs, basis) -> np.ndarray:
    return np.einsum("ni,iab->nab", np.asarray(coeffs), basis)


@dataclass(frozen=True, eq=False)
class OperatorFrame:
    """An ordered family of operators with an optional dual family."""

    elements: np.ndarray
    dual: np.ndarray | None = None
    labels: tuple = ()
    kind: str = "custom"
    positive: bool = False
    # (primal, dual) coefficient matrices w.r.t. hermitian_basis, when known
    coefficients: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=complex)
        if els.ndim != 3 or els.shape[1] != els.shape[2] or els.shape[0] == 0:
            raise DimensionError(f"frame elements must be a nonempty (n, d, d) stack, got {els.shape}")
        object.__setattr__(self, "elements", els)
        if self.dual is not None:
            dual = np.asarray(self.dual, dtype=complex)
            if dual.shape != els.shape:
                raise DimensionError("dual must match the frame in length and dimension")
            object.__setattr__(self, "dual", dual)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(1, len(els) + 1)))

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[0]

    @cached_property
    def gram(self) -> np.ndarray:
        g = np.einsum("aij,bij->ab", np.conj(self.elements), self.elements)
        return g.real if np.allclose(g.imag, 0.0, atol=1e-14) else g

    @cached_property
    def frame_matrix(self) -> np.ndarray:
        """The frame map in the coordinates of ``hermitian_basis(dim)``."""
        x = coefficients(self.elements, hermitian_basis(self.dim))
        xi = x.T @ np.conj(x)
        return xi.real if np.allclose(xi.imag, 0.0, atol=1e-14) else xi

    @cached_property
    def bounds(self) -> tuple[float, float]:
        ev = np.linalg.eigvalsh(self.frame_matrix)
        return float(ev[0]), float(ev[-1])

    def with_dual(self, dual) -> "OperatorFrame":
        return OperatorFrame(self.elements, dual, self.labels, self.kind, self.positive)


def frame_map_apply(frame: OperatorFrame, a) -> np.ndarray:
    """``Xi[A] = sum_alpha (F_alpha, A) F_alpha``."""
    a = as_operator(a)
    if a.shape[0] != frame.dim:
        raise DimensionError(f"operator of dim {a.shape[0]} vs frame dim {frame.dim}")
    w = np.einsum("aij,ij->a", np.conj(frame.elements), a)
    return np.einsum("a,aij->ij", w, frame.elements)


def frame_bounds(frame: OperatorFrame) -> tuple[float, float]:
    return frame.bounds


def canonical_dual(frame: OperatorFrame, tol: float = SINGULAR_TOL) -> OperatorFrame:
    """Return ``frame`` with dual ``D_alpha = Xi^{-1}[F_alpha]``."""
    xi = frame.frame_matrix
    ev, vecs = np.linalg.eigh(xi)
    if ev[0] <= tol:
        raise NotAFrameError(
            f"not a frame: lower frame bound {ev[0]:.3e} <= {tol:.1e}"
        )
    basis = hermitian_basis(frame.dim)
    x = coefficients(frame.elements, basis)
    xi_inv = (vecs / ev) @ np.conj(vecs).T
    # coefficients of Xi[A] are xi @ a, so Xi^{-1}[F_alpha] has xi_inv @ x_alpha
    dual = from_coefficients((xi_inv @ x.T).T, basis)
    return frame.with_dual(dual)


def verify_duality(frame: OperatorFrame, dual=None, tol: float = 1e-10) -> tuple[bool, float]:
    """Check ``sum_alpha (F_alpha, E_i) D_alpha = E_i`` on an orthonormal basis.

    Returns ``(ok, worst Frobenius residual)``.
    """
    dual = frame.dual if dual is None else np.asarray(dual, dtype=complex)
    if dual is None or len(dual) != len(frame):
        raise DimensionError("dual must have the same length as the frame")
    basis = hermitian_basis(frame.dim)
    w = np.einsum("aij,nij->na", np.conj(frame.elements), basis)
    recon = np.einsum("na,aij->nij", w, dual)
    resid = float(np.max(np.linalg.norm(recon - basis, axis=(1, 2))))
    return resid <= tol, resid


def pauli_frame(d: int) -> OperatorFrame:
    """Positive frame built on the generalized Pauli matrices, with its dual.

    ``F_11 = h_1``, ``F_kk = sqrt(d (k-1)/k) h_1 + h_k``,
    ``F_kj = 1/sqrt(2) + f_kj``. The dual is ``D_kk = h_k``, ``D_kj = f_kj``
    and ``D_11 = h_1 - sqrt(d) sum_k sqrt((k-1)/k) h_k - sqrt(d/2) sum f_kj``,
    where the last sum runs over every off-diagonal pair.
    """
    if d < 2:
        raise ValueError("pauli_frame needs d >= 2")
    g = gellmann_basis(d)
    h, f = g[:d], g[d:]
    eye = np.eye(d, dtype=complex)

    elements = [h[0]]
    for k in range(2, d + 1):
        elements.append(np.sqrt(d * (k - 1) / k) * h[0] + h[k - 1])
    elements += [eye / np.sqrt(2) + fk for fk in f]

    d11 = h[0].copy()
    for k in range(2, d + 1):
        d11 -= np.sqrt(d) * np.sqrt((k - 1) / k) * h[k - 1]
    d11 -= np.sqrt(d / 2) * f.sum(axis=0)
    dual = [d11] + [h[k - 1] for k in range(2, d + 1)] + list(f)

    return OperatorFrame(
        np.array(elements), np.array(dual), tuple(canonical_labels(d)), "pauli", True
    )


def basis_induced_family(d: int) -> OperatorFrame:
    """Positive family ``P`` built on ``|k><k|`` and its completion ``Q``.

    ``P_kk = |k><k|``, ``P_kj = 1/sqrt(2) + b_kj``; ``Q_kj = b_kj`` and
    ``Q_kk = |k><k| - (1/sqrt(2)) sum b``, the sum running over every
    off-diagonal pair. The coefficient matrices ``M`` (of ``P``) and ``N``
    (of ``Q``) in ``hermitian_basis(d)`` satisfy ``M^T N = 1``.
    """
    if d < 2:
        raise ValueError("basis_induced_family needs d >= 2")
    n = d * d
    # coordinates of the identity in hermitian_basis: ones on the diagonal labels
    identity = np.zeros(n)
    identity[:d] = 1.0
    m = np.eye(n)
    m[d:] += identity / np.sqrt(2)
    nq = np.eye(n)
    nq[:d, d:] -= 1.0 / np.sqrt(2)
    dual_check = m.T @ nq
    if not np.allclose(dual_check, np.eye(n), atol=1e-12):
        raise AssertionError("basis-induced coefficient tensors violate duality")
    basis = hermitian_basis(d)
    return OperatorFrame(
        from_coefficients(m, basis),
        from_coefficients(nq, basis),
        tuple(canonical_labels(d)),
        "basis",
        True,
        coefficients=(m, nq),
    )


def orthonormal_frame(basis, kind: str = "orthonormal") -> OperatorFrame:
    """An orthonormal basis used as its own (self-dual) frame."""
    basis = np.asarray(basis, dtype=complex)
    return OperatorFrame(basis, basis.copy(), (), kind, False)


def make_frame(kind: str, d: int) -> OperatorFrame:
    if kind == "pauli":
        return pauli_frame(d)
    if kind == "basis":
        return basis_induced_family(d)
    raise ValueError(f"unknown frame kind {kind!r} (expected 'pauli' or 'basis')")
