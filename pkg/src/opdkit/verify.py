"""End-to-end self-checks used by ``opdkit verify``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynamics, frames, opd, positivity
from .hs import BipartiteOperator, bell_state, min_eigenvalue, random_density, random_hermitian, tensor


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _check(name: str, value: float, bound: float) -> CheckResult:
    return CheckResult(name, bool(value <= bound), f"worst {value:.3e} (bound {bound:.0e})")


def check_frames(corrupt_dual: bool = False) -> list[CheckResult]:
    worst_dual, worst_pos = 0.0, 0.0
    for d in range(2, 7):
        for fr in (frames.pauli_frame(d), frames.basis_induced_family(d)):
            dual = fr.dual.copy()
            if corrupt_dual:
                dual[0] = dual[0] + np.eye(d)
            worst_dual = max(worst_dual, frames.verify_duality(fr, dual)[1])
            worst_pos = max(worst_pos, max(-min_eigenvalue(f) for f in fr.elements))
    return [
        _check("frame duality d=2..6", worst_dual, 1e-10),
        _check("frame positivity d=2..6", worst_pos, 1e-12),
    ]


def check_opd(rng: np.random.Generator, trials: int) -> list[CheckResult]:
    fr = frames.pauli_frame(2)
    worst_rec, worst_w, mism = 0.0, 0.0, 0
    for _ in range(trials):
        rho = BipartiteOperator(random_density(4, rng), 2, 2)
        o = opd.decompose(rho, fr)
        worst_rec = max(worst_rec, float(np.abs(opd.reconstruct(o).matrix - rho.matrix).max()))
        worst_w = max(worst_w, -float(o.weights.min()))
        try:
            opd.cost(rho, 1e-8)
            opd.cost(rho, 1e-8, frames.basis_induced_family(2))
        except opd.ConsistencyError:
            mism += 1
    canned = {
        "product": (tensor(random_density(2, rng), random_density(2, rng)), 1),
        "bell": (bell_state(), 4),
        "classical": (
            0.5 * tensor(np.diag([1.0, 0.0]), random_density(2, rng))
            + 0.5 * tensor(np.diag([0.0, 1.0]), random_density(2, rng)),
            2,
        ),
    }
    bad = [k for k, (st, n) in canned.items() if opd.cost(st, 1e-8) != n]
    return [
        _check("OPD reconstruction", worst_rec, 1e-10),
        _check("OPD weights non-negative", worst_w, 1e-12),
        CheckResult("cost = Schmidt rank (random)", mism == 0, f"{mism} mismatches in {trials}"),
        CheckResult("cost canned cases", not bad, "ok" if not bad else f"wrong: {bad}"),
    ]


def check_microscopic(rng: np.random.Generator, trials: int) -> list[CheckResult]:
    fr = frames.pauli_frame(2)
    worst = 0.0
    for _ in range(trials):
        rho = BipartiteOperator(random_density(4, rng), 2, 2)
        model = dynamics.MicroscopicModel(random_hermitian(4, rng), rho)
        o = opd.decompose(rho, fr)
        for t in rng.uniform(0.0, 5.0, size=10):
            diff = dynamics.opd_microscopic_evolution(o, model, t) - dynamics.exact_reduced_evolution(model, t)
            worst = max(worst, float(np.abs(diff).max()))
    return [_check("microscopic OPD identity", worst, 1e-8)]


def check_channels(rng: np.random.Generator, trials: int) -> list[CheckResult]:
    comp, prob, choi = 0.0, 0.0, 0.0
    for _ in range(trials):
        fam = dynamics.PauliChannelFamily(rng.uniform(0.0, 2.0, size=(4, 3)))
        for alpha in range(4):
            t, s = rng.uniform(0.0, 3.0, size=2)
            comp = max(comp, dynamics.semigroup_compose_check(fam, alpha, t, s))
            p = fam.probabilities(alpha, t)
            prob = max(prob, -float(p.min()), abs(float(p.sum()) - 1.0))
            choi = max(choi, -min_eigenvalue(dynamics.choi_matrix(fam, alpha, t)))
    return [
        _check("semigroup composition", comp, 1e-12),
        _check("Pauli probabilities", prob, 1e-12),
        _check("Choi positivity", choi, 1e-10),
    ]


def check_geometry(rng: np.random.Generator, trials: int) -> list[CheckResult]:
    disagree = 0
    for _ in range(trials):
        v = 1.0 + rng.normal(size=3) * rng.uniform(0.0, 1.5)
        rates = positivity.TwoMapRates(rng.uniform(0, 2, 3), rng.uniform(0, 2, 3))
        t = float(rng.uniform(0.0, 3.0))
        g = positivity.evolved_violation(v, rates, t)
        _, mn = dynamics.evolve_opd(positivity.opd_from_v(v), rates.family(), t)
        if abs(1.0 - g) > 1e-9 and (g <= 1.0) != (mn >= 0.0):
            disagree += 1
    return [CheckResult("g <= 1 iff evolved state positive", disagree == 0, f"{disagree} disagreements in {trials}")]


def run_checks(seed: int = 0, trials: int = 20, corrupt_dual: bool = False) -> list[CheckResult]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    results = check_frames(corrupt_dual)
    results += check_opd(rng, trials)
    results += check_microscopic(rng, trials)
    results += check_channels(rng, trials)
    results += check_geometry(rng, 10 * trials)
    return results
