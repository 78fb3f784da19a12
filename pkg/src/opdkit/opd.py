"""One-sided positive decompositions ``rho_SE = sum_a w_a D_a (x) rho_a``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frames import (
    OperatorFrame,
    coefficients,
    hermitian_basis,
    pauli_frame,
    verify_duality,
)
from .hs import (
    BipartiteOperator,
    DimensionError,
    apply_local_s,
    dagger,
    is_density,
    min_eigenvalue,
)
from .schmidt import schmidt_decompose

WEIGHT_TOL = 1e-12
DENSITY_TOL = 1e-10


class NotADensityError(ValueError):
    def __init__(self, min_eig: float, trace: complex):
        self.min_eig = min_eig
        self.trace = trace
        super().__init__(
            f"input is not a density operator (min eigenvalue {min_eig:.3e}, "
            f"trace {trace.real:.12g}{trace.imag:+.3e}j)"
        )


class NonPositiveFrameError(ValueError):
    """A non-positive frame element meets a nonzero environmental operator."""


class ConsistencyError(RuntimeError):
    """Two independent routes to the same quantity disagree."""


@dataclass(frozen=True, eq=False)
class OPDTerm:
    weight: float
    system_op: np.ndarray
    env_state: np.ndarray
    # position of the term in the source frame's canonical order
    index: int | None = None

    @property
    def env_operator(self) -> np.ndarray:
        return self.weight * self.env_state


@dataclass(frozen=True, eq=False)
class ReductionCertificate:
    original_count: int
    final_count: int
    eliminated: tuple[int, ...]
    # one array per elimination; entry a is c_a in rho_eliminated = sum_a c_a rho_a
    dependency_coefficients: tuple[np.ndarray, ...]
    updated_dual: np.ndarray
    updated_primal: np.ndarray
    # q[b, a]: updated primal a expanded on the original frame element b
    q: np.ndarray
    # f[a, k]: updated primal a on the Schmidt-adapted orthonormal basis G_k
    f: np.ndarray
    # g[k, a]: G_k expanded on the updated primal frame
    g: np.ndarray
    schmidt_rank: int
    duality_residual: float
    # G_k: the first schmidt_rank elements are the system Schmidt operators
    schmidt_basis: np.ndarray = field(default=None, repr=False)
    vanishing_residuals: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class OPD:
    dim_s: int
    dim_e: int
    terms: tuple[OPDTerm, ...]
    frame: OperatorFrame | None = None
    certificate: ReductionCertificate | None = None

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([t.weight for t in self.terms])

    @property
    def env_states(self) -> np.ndarray:
        return np.array([t.env_state for t in self.terms])

    @property
    def system_ops(self) -> np.ndarray:
        return np.array([t.system_op for t in self.terms])

    def env_operators(self) -> np.ndarray:
        return np.array([t.env_operator for t in self.terms])


def check_density(rho: BipartiteOperator, tol: float = DENSITY_TOL) -> None:
    m = rho.matrix
    if not is_density(m, tol):
        raise NotADensityError(min_eigenvalue(m), complex(np.trace(m)))


def decompose(
    rho: BipartiteOperator,
    frame: OperatorFrame,
    tol: float = WEIGHT_TOL,
    density_tol: float = DENSITY_TOL,
) -> OPD:
    """Decompose ``rho`` on a frame with verified dual.

    ``w_a rho_a = Tr_S[(F_a^dagger (x) 1) rho]``; when ``w_a <= tol`` the
    environmental state is set to the maximally mixed state.
    """
    if frame.dual is None:
        raise ValueError("frame has no dual")
    if frame.dim != rho.dim_s:
        raise DimensionError(f"frame dim {frame.dim} vs system dim {rho.dim_s}")
    ok, resid = verify_duality(frame)
    if not ok:
        raise ValueError(f"frame dual fails the reconstruction identity (residual {resid:.3e})")
    check_density(rho, density_tol)

    mixed = np.eye(rho.dim_e, dtype=complex) / rho.dim_e
    terms = []
    for a, (f, d) in enumerate(zip(frame.elements, frame.dual)):
        x = apply_local_s(rho, dagger(f))
        if np.linalg.norm(x) > tol and min_eigenvalue(f) < -WEIGHT_TOL:
            raise NonPositiveFrameError(
                f"frame element {frame.labels[a]} is not positive but its "
                f"environmental operator has norm {np.linalg.norm(x):.3e}"
            )
        w = float(np.trace(x).real)
        rho_a = mixed.copy() if w <= tol else 0.5 * (x + dagger(x)) / w
        terms.append(OPDTerm(w, d.copy(), rho_a, a))
    return OPD(rho.dim_s, rho.dim_e, tuple(terms), frame)


def reconstruct(opd: OPD) -> BipartiteOperator:
    n = opd.dim_s * opd.dim_e
    out = np.zeros((n, n), dtype=complex)
    for t in opd.terms:
        if t.system_op.shape != (opd.dim_s,) * 2 or t.env_state.shape != (opd.dim_e,) * 2:
            raise DimensionError("term dimensions do not match the decomposition")
        out += t.weight * np.kron(t.system_op, t.env_state)
    return BipartiteOperator(out, opd.dim_s, opd.dim_e)


def reduced_state(opd: OPD) -> np.ndarray:
    """``rho_S = sum_a w_a D_a``."""
    out = np.zeros((opd.dim_s, opd.dim_s), dtype=complex)
    for t in opd.terms:
        out += t.weight * t.system_op
    return out


def _env_vectors(ops: np.ndarray, dim_e: int) -> np.ndarray:
    v = coefficients(ops, hermitian_basis(dim_e))
    return v.real if np.allclose(v.imag, 0.0, atol=1e-14) else v


def numerical_rank(rows: np.ndarray, tol: float) -> int:
    if rows.size == 0:
        return 0
    s = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s[0] > 0 else 0


def _dependency(rows: np.ndarray, pos: int) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of row ``pos`` on the other rows, and residual norm."""
    others = np.delete(rows, pos, axis=0)
    k, *_ = np.linalg.lstsq(others.T, rows[pos], rcond=None)
    resid = float(np.linalg.norm(others.T @ k - rows[pos]))
    return k, resid


def _completed_basis(ops: np.ndarray, d: int) -> np.ndarray:
    """Orthonormal basis of L2(C^d) whose leading elements are ``ops``."""
    basis = hermitian_basis(d)
    lead = coefficients(ops, basis)
    q, _ = np.linalg.qr(np.concatenate([lead.T, np.eye(d * d)], axis=1))
    coeffs = q[:, : d * d].T
    coeffs[: len(ops)] = lead
    return np.einsum("ni,iab->nab", coeffs, basis)


def reduce(opd: OPD, tol: float = 1e-10) -> OPD:
    """Eliminate linearly dependent environmental operators.

    The final term count is the numerical rank (relative threshold ``tol``)
    of ``{w_a rho_a}``. Each elimination of ``b`` with ``w_b rho_b = sum k_a w_a rho_a``
    updates ``D_a += k_a D_b`` and ``F_b -= sum k_a F_a``, which keeps the
    frame pair dual and makes ``Tr_S[(F_b (x) 1) rho]`` vanish.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    frame = opd.frame
    if frame is None or frame.dual is None:
        raise ValueError("reduction needs the source frame and its dual")
    if frame.dim != opd.dim_s:
        raise DimensionError("frame and decomposition dimensions differ")
    for pos, t in enumerate(opd.terms):
        if t.index is None:
            raise ValueError(f"term {pos} carries no frame index")

    source = reconstruct(opd)
    primal = frame.elements.copy()
    dual = frame.dual.copy()
    terms = {t.index: t for t in opd.terms}
    eliminated: list[int] = []
    deps: list[np.ndarray] = []

    for idx in sorted(terms):
        if terms[idx].weight <= tol:
            eliminated.append(idx)
            deps.append(np.zeros(len(frame)))
            del terms[idx]

    while terms:
        active = sorted(terms)
        rows = _env_vectors(np.array([terms[i].env_operator for i in active]), opd.dim_e)
        if numerical_rank(rows, tol) == len(active):
            break
        row_scale = float(np.max(np.linalg.norm(rows, axis=1)))
        fits = [_dependency(rows, p) for p in range(len(active))]
        rel = np.array([r for _, r in fits]) / row_scale
        dependent = [p for p in range(len(active)) if rel[p] <= tol]
        # most dependent first; within the tolerance band the highest index goes
        pos = max(dependent) if dependent else int(np.argmin(rel))
        k = fits[pos][0]
        beta = active[pos]
        others = [i for i in active if i != beta]
        w_beta = terms[beta].weight
        c = np.zeros(len(frame), dtype=k.dtype)
        for ka, a in zip(k, others):
            dual[a] = dual[a] + ka * dual[beta]
            primal[beta] = primal[beta] - np.conj(ka) * primal[a]
            c[a] = ka * terms[a].weight / w_beta
        eliminated.append(beta)
        deps.append(c)
        del terms[beta]
        for a in others:
            t = terms[a]
            terms[a] = OPDTerm(t.weight, dual[a].copy(), t.env_state, a)

    new_frame = OperatorFrame(primal, dual, frame.labels, frame.kind + "-reduced", False)
    _, dual_resid = verify_duality(new_frame)
    vanishing = {
        b: float(np.linalg.svd(apply_local_s(source, dagger(primal[b])), compute_uv=False).sum())
        for b in eliminated
    }

    sd = schmidt_decompose(source, tol)
    g_basis = _completed_basis(sd.system_ops, opd.dim_s)
    q = np.einsum("bij,aij->ba", np.conj(frame.dual), primal)
    f = np.einsum("kij,aij->ak", np.conj(g_basis), primal)
    g = np.einsum("aij,kij->ka", np.conj(dual), g_basis)

    cert = ReductionCertificate(
        original_count=len(opd.terms),
        final_count=len(terms),
        eliminated=tuple(eliminated),
        dependency_coefficients=tuple(deps),
        updated_dual=dual,
        updated_primal=primal,
        q=q,
        f=f,
        g=g,
        schmidt_rank=sd.rank,
        duality_residual=dual_resid,
        schmidt_basis=g_basis,
        vanishing_residuals=vanishing,
    )
    kept = tuple(terms[i] for i in sorted(terms))
    return OPD(opd.dim_s, opd.dim_e, kept, new_frame, cert)


def cost(rho: BipartiteOperator, tol: float = 1e-8, frame: OperatorFrame | None = None) -> int:
    """Minimal number of OPD terms, computed by reduction and by Schmidt rank.

    Raises :class:`ConsistencyError` if the two routes disagree.
    """
    frame = pauli_frame(rho.dim_s) if frame is None else frame
    n_reduced = reduce(decompose(rho, frame), tol).term_count
    n_schmidt = schmidt_decompose(rho, tol).rank
    if n_reduced != n_schmidt:
        raise ConsistencyError(
            f"reduced OPD has {n_reduced} terms but the Schmidt rank is {n_schmidt}"
        )
    return n_reduced
