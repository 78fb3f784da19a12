"""Positivity domain of qubit states evolved term-wise by two Pauli semigroups.

A reduced state is parametrized by ``v = (v1, v2, v3)`` through the weights
``w = (1, v1, v2, v3) / sqrt(2)`` on the qubit Pauli dual frame, giving
``rho_S = (1 + sum_j (v_j - 1) sigma_j) / 2``. Channel ``phi`` (eigenvalues
``lam``) acts on the trace-carrying dual element and ``phi~`` (``lam~``) on
the three others, so that at time ``t``

    rho_S(t) >= 0   iff   g(t) = sum_j (lam_j(t) - lam~_j(t) v_j)^2 <= 1.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np

from .dynamics import PauliChannelFamily
from .frames import pauli_frame
from .hs import SIGMA
from .opd import OPD, OPDTerm

MARGINAL_TOL = 1e-9
EXIT_TIME_TOL = 1e-9
SECULAR_TOL = 1e-12
# canonical qubit frame order is (1,1), (2,2), (1,2), (2,1) -> D_0, sigma_z, sigma_y, sigma_x
_CANONICAL_SIGMA = (None, 3, 2, 1)


@dataclass(frozen=True)
class TwoMapRates:
    """Rates ``gamma`` of ``phi`` and ``gamma_tilde`` of ``phi~`` (inverse time)."""

    gamma: tuple[float, float, float]
    gamma_tilde: tuple[float, float, float]

    def __post_init__(self):
        g = tuple(float(x) for x in self.gamma)
        gt = tuple(float(x) for x in self.gamma_tilde)
        if len(g) != 3 or len(gt) != 3:
            raise ValueError("need three rates for each map")
        if min(g + gt) < 0:
            raise ValueError("rates must be non-negative")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "gamma_tilde", gt)

    @staticmethod
    def _sums(g) -> np.ndarray:
        g = np.asarray(g)
        return g.sum() - g

    def lam(self, t) -> np.ndarray:
        """``lam_j(t)``; shape ``(..., 3)`` for array ``t``."""
        return np.exp(-2.0 * np.multiply.outer(np.asarray(t, float), self._sums(self.gamma)))

    def lam_tilde(self, t) -> np.ndarray:
        return np.exp(-2.0 * np.multiply.outer(np.asarray(t, float), self._sums(self.gamma_tilde)))

    def asymptotic(self) -> tuple[np.ndarray, np.ndarray]:
        """``t -> infinity`` limits: 1 where the rate sum vanishes, else 0."""
        return (
            (self._sums(self.gamma) == 0).astype(float),
            (self._sums(self.gamma_tilde) == 0).astype(float),
        )

    def family(self) -> PauliChannelFamily:
        return PauliChannelFamily.two_map(self.gamma, self.gamma_tilde)

    def mean_rate(self) -> float:
        r = np.array(self.gamma + self.gamma_tilde)
        return float(r[r > 0].mean()) if np.any(r > 0) else 1.0


def example_i(gamma: float = 1.0) -> TwoMapRates:
    """``gamma_1 = gamma~_1 = 0``, ``gamma_2 = gamma_3 = 2 gamma~_2 = 2 gamma~_3 = gamma``."""
    return TwoMapRates((0.0, gamma, gamma), (0.0, gamma / 2, gamma / 2))


def example_ii(gamma: float = 1.0) -> TwoMapRates:
    """``gamma_1 = gamma~_1 = gamma~_2 = 0``, ``gamma_2 = gamma_3 = gamma~_3 = gamma``."""
    return TwoMapRates((0.0, gamma, gamma), (0.0, 0.0, gamma))


EXAMPLES = {"I": example_i, "II": example_ii}


def state_from_v(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return 0.5 * (SIGMA[0] + sum((v[j] - 1.0) * SIGMA[j + 1] for j in range(3)))


def opd_from_v(v) -> OPD:
    """Qubit decomposition with weights ``(1, v) / sqrt(2)`` in canonical frame order.

    There is no environment; every environmental state is the trivial ``[[1]]``.
    """
    v = np.asarray(v, dtype=float)
    upsilon = np.concatenate([[1.0], v])
    frame = pauli_frame(2)
    terms = []
    for pos, sig in enumerate(_CANONICAL_SIGMA):
        weight = upsilon[0 if sig is None else sig] / np.sqrt(2)
        terms.append(OPDTerm(float(weight), frame.dual[pos].copy(), np.ones((1, 1), complex), pos))
    return OPD(2, 1, tuple(terms), frame)


def in_initial_domain(v) -> bool:
    v = np.asarray(v, dtype=float)
    return bool(np.sum((1.0 - v) ** 2) <= 1.0)


def evolved_violation(v, rates: TwoMapRates, t) -> np.ndarray | float:
    """``g = sum_j (lam_j(t) - lam~_j(t) v_j)^2``.

    Broadcasts: ``v`` of shape ``(..., 3)`` against scalar or 1-d ``t``; the
    result has shape ``v.shape[:-1] + t.shape``.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("time must be non-negative")
    v = np.asarray(v, dtype=float)
    lam = rates.lam(t_arr)  # t.shape + (3,)
    lt = rates.lam_tilde(t_arr)
    vv = v.reshape(v.shape[:-1] + (1,) * t_arr.ndim + (3,))
    g = np.sum((lam - lt * vv) ** 2, axis=-1)
    return float(g) if g.ndim == 0 else g


def asymptotic_violation(v, rates: TwoMapRates) -> np.ndarray | float:
    lam, lt = rates.asymptotic()
    g = np.sum((lam - lt * np.asarray(v, dtype=float)) ** 2, axis=-1)
    return float(g) if np.ndim(g) == 0 else g


class VerdictKind(str, enum.Enum):
    ALWAYS_POSITIVE = "AlwaysPositive"
    TRANSIENTLY_NEGATIVE = "TransientlyNegative"
    ETERNALLY_NEGATIVE = "EternallyNegative"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class PositivityVerdict:
    kind: VerdictKind
    asymptotic_g: float
    max_g: float
    first_exit_time: float | None = None
    reentry_time: float | None = None


def time_grid(rates: TwoMapRates, horizon: float | None = None, n: int = 200) -> np.ndarray:
    """``t = 0`` plus ``n`` log-spaced times spanning four decades up to ``horizon``."""
    horizon = 10.0 / rates.mean_rate() if horizon is None else float(horizon)
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    return np.concatenate([[0.0], np.logspace(-4, 0, n) * horizon])


def _kinds(g_grid: np.ndarray, g_inf: np.ndarray, tol: float) -> np.ndarray:
    kinds = np.full(g_inf.shape, VerdictKind.ALWAYS_POSITIVE.value, dtype=object)
    kinds[np.any(g_grid > 1.0 + tol, axis=-1)] = VerdictKind.TRANSIENTLY_NEGATIVE.value
    kinds[g_inf > 1.0 + tol] = VerdictKind.ETERNALLY_NEGATIVE.value
    kinds[np.abs(g_inf - 1.0) <= tol] = VerdictKind.MARGINAL.value
    return kinds


def _crossing(f, lo: float, hi: float, tol: float = EXIT_TIME_TOL) -> float:
    """Bisect for the sign change of ``f`` in ``[lo, hi]`` (``f(lo) <= 0 < f(hi)`` or reversed)."""
    flo = f(lo) > 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == flo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify(
    v,
    rates: TwoMapRates,
    horizon: float | None = None,
    grid: int = 200,
    tol: float = MARGINAL_TOL,
) -> PositivityVerdict:
    """Classify the fate of ``v`` under the two-map evolution.

    Eternal negativity is read off the analytic ``t -> infinity`` limit of
    ``g``; the grid only locates exit and re-entry times.
    """
    v = np.asarray(v, dtype=float)
    times = time_grid(rates, horizon, grid)
    g = evolved_violation(v, rates, times)
    g_inf = asymptotic_violation(v, rates)
    kind = VerdictKind(_kinds(g[None], np.array([g_inf]), tol)[0])

    def excess(t):
        return evolved_violation(v, rates, t) - 1.0

    exit_time = reentry = None
    above = g > 1.0
    if above[0]:
        exit_time = 0.0
    elif np.any(above):
        i = int(np.argmax(above))
        exit_time = _crossing(excess, times[i - 1], times[i])
    elif kind is VerdictKind.ETERNALLY_NEGATIVE:
        lo, hi = times[-1], 2.0 * times[-1]
        while excess(hi) <= 0:
            lo, hi = hi, 2.0 * hi
        exit_time = _crossing(excess, lo, hi)
    if exit_time is not None and kind is not VerdictKind.ETERNALLY_NEGATIVE:
        start = int(np.argmax(above)) if np.any(above) else 0
        below = np.nonzero(~above[start:])[0]
        if below.size:
            j = start + int(below[0])
            reentry = _crossing(excess, times[j - 1], times[j]) if j > 0 else 0.0
    return PositivityVerdict(kind, g_inf, float(g.max()), exit_time, reentry)


# -- ellipsoid vs evolved ball -------------------------------------------------


@dataclass(frozen=True)
class Containment:
    contained: bool
    max_distance_sq: float
    # initial point v whose image is farthest from the evolved ball centre
    witness: np.ndarray = field(repr=False)
    multiplier: float = float("nan")


def secular_max(a, c, tol: float = SECULAR_TOL) -> tuple[float, np.ndarray, float]:
    """Maximize ``sum_i (c_i - a_i w_i)^2`` over the unit sphere ``|w| = 1``.

    Stationary points satisfy ``(diag(a^2) - nu) w = a c``; the maximum has
    ``nu >= max a^2`` and solves ``sum_i (a_i c_i)^2 / (a_i^2 - nu)^2 = 1``,
    found by bisection on ``nu``. Returns ``(max, w, nu)``.
    """
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    a2 = a * a
    b = a * c
    top = a2.max()

    def secular(nu):
        return np.sum(b * b / (a2 - nu) ** 2) - 1.0

    eps = 1e-14 * max(1.0, top)
    lo = top + eps
    if secular(lo) <= 0:
        # hard case: the multiplier sits on the top eigenvalue
        nu = top
        on_top = a2 >= top - eps
        w = np.zeros_like(a)
        w[~on_top] = b[~on_top] / (a2[~on_top] - nu)
        rest = 1.0 - np.sum(w * w)
        w[np.argmax(on_top)] = np.sqrt(max(rest, 0.0))
    else:
        hi = top + np.linalg.norm(b) + eps
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if secular(mid) > 0:
                lo = mid
            else:
                hi = mid
        nu = 0.5 * (lo + hi)
        w = b / (a2 - nu)
        w /= np.linalg.norm(w)
    value = float(np.sum((c - a * w) ** 2))
    return value, w, float(nu)


def _ellipsoid_problem(rates: TwoMapRates, t: float) -> tuple[np.ndarray, np.ndarray]:
    lam = rates.lam(t)
    lt = rates.lam_tilde(t)
    # evolved point x = lam~ * v with v = 1 - w; distance to the ball centre lam
    return lt, lt - lam


def ellipsoid_ball_containment(rates: TwoMapRates, t: float) -> Containment:
    """Largest squared distance from the evolved ball centre to the evolved ellipsoid.

    The ellipsoid is the image ``lam~ * v`` of the initial ball ``|v - 1| <= 1``;
    it lies inside the evolved positivity ball iff the maximum is ``<= 1``.
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    a, c = _ellipsoid_problem(rates, t)
    value, w, nu = secular_max(a, c)
    return Containment(value <= 1.0, value, 1.0 - w, nu)


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(1.0 - z * z)
    phi = i * np.pi * (3.0 - np.sqrt(5.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def sphere_oracle_max(
    rates: TwoMapRates, t: float, n: int = 100_000, chunk: int = 1_000_000
) -> tuple[float, np.ndarray]:
    """Brute-force maximum of the same objective on a Fibonacci lattice of ``n`` points."""
    a, c = _ellipsoid_problem(rates, t)
    best, best_w = -np.inf, None
    for start in range(0, n, chunk):
        i = np.arange(start, min(n, start + chunk), dtype=float)
        z = 1.0 - (2.0 * i + 1.0) / n
        r = np.sqrt(1.0 - z * z)
        phi = i * np.pi * (3.0 - np.sqrt(5.0))
        w = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
        vals = np.sum((c - a * w) ** 2, axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_w = float(vals[k]), w[k]
    return best, 1.0 - best_w


def ellipsoid_geometry(rates: TwoMapRates, t) -> dict:
    """Centres and semi-axes of the evolved ellipsoid and ball at time(s) ``t``."""
    lt = rates.lam_tilde(t)
    return {"ellipsoid_center": lt, "ellipsoid_semi_axes": lt, "ball_center": rates.lam(t), "ball_radius": 1.0}


# -- point clouds --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DomainCloud:
    t: float
    v: np.ndarray  # (n, 3)
    g: np.ndarray
    in_initial: np.ndarray
    in_evolved: np.ndarray
    verdict: np.ndarray

    def rows(self):
        for k in range(len(self.g)):
            yield {
                "v1": self.v[k, 0],
                "v2": self.v[k, 1],
                "v3": self.v[k, 2],
                "t": self.t,
                "g": self.g[k],
                "in_initial_domain": bool(self.in_initial[k]),
                "in_evolved_domain": bool(self.in_evolved[k]),
                "verdict": self.verdict[k],
            }


CLOUD_COLUMNS = ["v1", "v2", "v3", "t", "g", "in_initial_domain", "in_evolved_domain", "verdict"]


def sample_domain(
    rates: TwoMapRates,
    t: float,
    resolution: int,
    ball_only: bool = False,
    horizon: float | None = None,
    grid: int = 200,
) -> DomainCloud:
    """Regular grid over the cube ``[0, 2]^3`` bounding the initial ball.

    Each point is flagged for the initial condition ``|v - 1| <= 1`` and the
    evolved one ``g(t) <= 1``, and carries its long-time verdict.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    axis = np.linspace(0.0, 2.0, resolution)
    v = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    in_initial = np.sum((1.0 - v) ** 2, axis=1) <= 1.0
    if ball_only:
        v, in_initial = v[in_initial], in_initial[in_initial]
    g = evolved_violation(v, rates, float(t))
    g = np.atleast_1d(g)
    times = time_grid(rates, horizon, grid)
    verdict = _kinds(evolved_violation(v, rates, times), asymptotic_violation(v, rates), MARGINAL_TOL)
    return DomainCloud(float(t), v, g, in_initial, g <= 1.0, verdict)


def write_cloud_csv(clouds, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CLOUD_COLUMNS)
        w.writeheader()
        for cloud in clouds:
            for row in cloud.rows():
                w.writerow(row)
