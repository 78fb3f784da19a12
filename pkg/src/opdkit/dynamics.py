"""CPTP evolution: qubit Pauli-channel semigroups and exact unitary dilations."""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hs import SIGMA, BipartiteOperator, DimensionError, as_operator, dagger, min_eigenvalue, partial_trace_e
from .opd import OPD, check_density

# p = HADAMARD_4 @ lambda / 4
HADAMARD_4 = np.array(
    [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=float
)


@dataclass(frozen=True, eq=False)
class PauliChannelFamily:
    """Pauli-channel semigroups, one per OPD term.

    ``rates[a, j - 1]`` is the rate of ``sigma_j`` in the generator of channel
    ``a``. Channel ``a`` acts on the term at canonical position ``a``.
    """

    rates: np.ndarray

    def __post_init__(self):
        r = np.atleast_2d(np.asarray(self.rates, dtype=float))
        if r.shape[1] != 3:
            raise ValueError(f"each channel needs 3 rates, got shape {r.shape}")
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise ValueError("semigroup rates must be finite and non-negative")
        object.__setattr__(self, "rates", r)

    @classmethod
    def two_map(cls, rates, rates_tilde) -> "PauliChannelFamily":
        """Channel 0 with ``rates``; channels 1..3 share ``rates_tilde``."""
        return cls(np.array([rates, rates_tilde, rates_tilde, rates_tilde], dtype=float))

    def __len__(self) -> int:
        return self.rates.shape[0]

    def eigenvalues(self, alpha: int, t: float) -> np.ndarray:
        """``(1, l_1, l_2, l_3)`` with ``l_j = exp(-2 (g_k + g_m) t)``."""
        _check_time(t)
        g = self.rates[alpha]
        sums = g.sum() - g  # g_k + g_m for j != k != m
        return np.concatenate([[1.0], np.exp(-2.0 * sums * t)])

    def probabilities(self, alpha: int, t: float) -> np.ndarray:
        return HADAMARD_4 @ self.eigenvalues(alpha, t) / 4.0

    def mean_rate(self) -> float:
        nz = self.rates[self.rates > 0]
        return float(nz.mean()) if nz.size else 1.0


def _check_time(t: float) -> None:
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")


def channel_apply(family: PauliChannelFamily, alpha: int, t: float, a) -> np.ndarray:
    """``phi_alpha(t)[A] = sum_j p_j(t) sigma_j A sigma_j``."""
    a = as_operator(a)
    if a.shape != (2, 2):
        raise DimensionError("Pauli channels act on qubit operators only")
    p = family.probabilities(alpha, t)
    return sum(pj * s @ a @ s for pj, s in zip(p, SIGMA))


def choi_matrix(family: PauliChannelFamily, alpha: int, t: float) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            out += np.kron(e, channel_apply(family, alpha, t, e))
    return out


def semigroup_compose_check(family: PauliChannelFamily, alpha: int, t: float, s: float) -> float:
    """Max Frobenius residual of ``phi(t+s) - phi(t) o phi(s)`` on the matrix units."""
    _check_time(t)
    _check_time(s)
    worst = 0.0
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            lhs = channel_apply(family, alpha, t + s, e)
            rhs = channel_apply(family, alpha, t, channel_apply(family, alpha, s, e))
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def _term_channel(opd: OPD, pos: int) -> int:
    idx = opd.terms[pos].index
    return pos if idx is None else idx


def evolve_opd(opd: OPD, family: PauliChannelFamily, t: float) -> tuple[np.ndarray, float]:
    """``rho_S(t) = sum_a w_a phi_a(t)[D_a]`` and its minimum eigenvalue.

    Positivity of the result is not guaranteed, hence the eigenvalue.
    """
    _check_time(t)
    if opd.dim_s != 2:
        raise DimensionError("Pauli-channel evolution needs a qubit system")
    if len(opd.terms) > len(family):
        raise ValueError(f"{len(opd.terms)} terms but only {len(family)} channels")
    out = np.zeros((2, 2), dtype=complex)
    for pos, term in enumerate(opd.terms):
        ch = _term_channel(opd, pos)
        if ch >= len(family):
            raise ValueError(f"term {pos} maps to channel {ch}, family has {len(family)}")
        out += term.weight * channel_apply(family, ch, t, term.system_op)
    return out, min_eigenvalue(out)


def bloch_vector(rho) -> np.ndarray:
    rho = as_operator(rho)
    return np.array([np.trace(rho @ s).real for s in SIGMA[1:]])


def default_time_grid(family_or_rate, n: int = 200) -> np.ndarray:
    """``t = 0`` plus ``n`` log-spaced points on ``[1e-3, 10] / mean rate``."""
    rate = (
        family_or_rate.mean_rate()
        if isinstance(family_or_rate, PauliChannelFamily)
        else float(family_or_rate)
    )
    return np.concatenate([[0.0], np.logspace(-3, 1, n) / rate])


def trajectory(opd: OPD, family: PauliChannelFamily, times) -> list[dict]:
    rows = []
    for t in times:
        rho, mn = evolve_opd(opd, family, float(t))
        x, y, z = bloch_vector(rho)
        rows.append({"t": float(t), "x": x, "y": y, "z": z, "min_eig": mn})
    return rows


def write_trajectory_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["t", "x", "y", "z", "min_eig"])
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(float(v)) for k, v in r.items()})


def load_rates_config(path) -> PauliChannelFamily:
    """Read channel rates from a plain-text file.

    One channel per line, three whitespace- or comma-separated rates;
    ``#`` starts a comment. Two lines give the two-map family
    (channel 0, then the rates shared by channels 1-3); otherwise one line
    per channel.
    """
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        # optional "name =" or "name:" prefix
        line = re.split(r"[=:]", line)[-1]
        try:
            vals = [float(p) for p in line.replace(",", " ").split()]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: cannot parse rates: {exc}") from None
        if len(vals) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 rates, got {len(vals)}")
        rows.append(vals)
    if len(rows) == 2:
        return PauliChannelFamily.two_map(*rows)
    if not rows:
        raise ValueError(f"{path}: no rates found")
    return PauliChannelFamily(np.array(rows))


# -- microscopic dilation ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MicroscopicModel:
    """Joint Hamiltonian (hbar = 1) and initial state on H_S (x) H_E."""

    hamiltonian: np.ndarray
    rho_se: BipartiteOperator

    def __post_init__(self):
        h = as_operator(self.hamiltonian)
        if h.shape[0] != self.rho_se.dim:
            raise DimensionError("Hamiltonian and state dimensions differ")
        if np.max(np.abs(h - dagger(h))) > 1e-12:
            raise ValueError("Hamiltonian is not Hermitian")
        object.__setattr__(self, "hamiltonian", h)

    @property
    def dim_s(self) -> int:
        return self.rho_se.dim_s

    @property
    def dim_e(self) -> int:
        return self.rho_se.dim_e

    def propagator(self, t: float) -> np.ndarray:
        _check_time(t)
        ev, vecs = np.linalg.eigh(self.hamiltonian)
        return (vecs * np.exp(-1j * ev * t)) @ dagger(vecs)


def microscopic_map(model: MicroscopicModel, rho_env, t: float, a) -> np.ndarray:
    """``Tr_E[U(t) (A (x) rho_env) U(t)^dagger]``."""
    a = as_operator(a)
    rho_env = as_operator(rho_env)
    if a.shape[0] != model.dim_s or rho_env.shape[0] != model.dim_e:
        raise DimensionError("operator dimensions do not match the model")
    u = model.propagator(t)
    joint = u @ np.kron(a, rho_env) @ dagger(u)
    return partial_trace_e(BipartiteOperator(joint, model.dim_s, model.dim_e))


def exact_reduced_evolution(model: MicroscopicModel, t: float) -> np.ndarray:
    u = model.propagator(t)
    joint = u @ model.rho_se.matrix @ dagger(u)
    return partial_trace_e(BipartiteOperator(joint, model.dim_s, model.dim_e))


def opd_microscopic_evolution(opd: OPD, model: MicroscopicModel, t: float) -> np.ndarray:
    """``sum_a w_a Phi_a(t)[D_a]`` with ``Phi_a`` the dilation built on ``rho_a``."""
    if (opd.dim_s, opd.dim_e) != (model.dim_s, model.dim_e):
        raise DimensionError("decomposition and model dimensions differ")
    out = np.zeros((opd.dim_s, opd.dim_s), dtype=complex)
    for term in opd.terms:
        out += term.weight * microscopic_map(model, term.env_state, t, term.system_op)
    return out


def make_model(hamiltonian, rho_se: BipartiteOperator, density_tol: float = 1e-10) -> MicroscopicModel:
    check_density(rho_se, density_tol)
    return MicroscopicModel(hamiltonian, rho_se)

