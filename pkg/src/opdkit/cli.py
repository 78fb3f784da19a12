"""Command-line entry point.

Exit codes: 0 success, 2 input error, 3 internal-consistency failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, frames, io, opd, positivity
from .verify import run_checks

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONSISTENCY = 3


class InputError(Exception):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class RunConfig:
    """Validated parameters for one command; defaults are the documented ones."""

    command: str
    state: str | None = None
    opd_file: str | None = None
    frame: str = "pauli"
    tol: float = 1e-10
    reduce: bool = False
    example: str | None = None
    gamma: float = 1.0
    rates: str | None = None
    config: str | None = None
    gt: list[float] = field(default_factory=lambda: [0.1, 0.5, 2.0])
    v: list[float] | None = None
    classify: list[float] | None = None
    resolution: int = 21
    oracle_points: int = 100_000
    seed: int = 0
    trials: int = 20
    out: str | None = None
    corrupt_dual: bool = False

    def validate(self) -> None:
        if self.tol <= 0:
            raise InputError("tol", "must be positive")
        if self.frame not in ("pauli", "basis"):
            raise InputError("frame", "must be 'pauli' or 'basis'")
        if self.command in ("decompose", "cost") and not self.state:
            raise InputError("state", "a state file is required")
        if self.example is not None and self.example not in positivity.EXAMPLES:
            raise InputError("example", "must be I or II")
        if self.gamma <= 0:
            raise InputError("gamma", "must be positive")
        if any(t < 0 for t in self.gt):
            raise InputError("gt", "times must be non-negative")
        if self.resolution < 2:
            raise InputError("resolution", "must be at least 2")
        if self.oracle_points < 1:
            raise InputError("oracle-points", "must be positive")
        if self.trials < 1:
            raise InputError("trials", "must be at least 1")
        for name in ("v", "classify"):
            val = getattr(self, name)
            if val is not None and len(val) != 3:
                raise InputError(name, "expected three comma-separated numbers")
        if self.command in ("positivity", "evolve"):
            given = [x for x in (self.example, self.rates, self.config) if x is not None]
            if len(given) != 1:
                raise InputError("example", "give exactly one of --example, --rates, --config")
        if self.command == "evolve" and (self.v is None) == (self.opd_file is None):
            raise InputError("v", "give exactly one of --v and --opd")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _two_map_rates(cfg: RunConfig) -> positivity.TwoMapRates:
    if cfg.example is not None:
        return positivity.EXAMPLES[cfg.example](cfg.gamma)
    if cfg.rates is not None:
        vals = _float_list(cfg.rates)
        if len(vals) != 6:
            raise InputError("rates", "expected six rates 'g1,g2,g3;h1,h2,h3'")
        if min(vals) < 0:
            raise InputError("rates", "rates must be non-negative")
        return positivity.TwoMapRates(vals[:3], vals[3:])
    try:
        fam = dynamics.load_rates_config(cfg.config)
    except (OSError, ValueError) as exc:
        raise InputError("config", str(exc)) from None
    r = fam.rates
    if len(r) != 4 or not np.allclose(r[1], r[2]) or not np.allclose(r[1], r[3]):
        raise InputError("config", "positivity studies need a two-map rate file")
    return positivity.TwoMapRates(r[0], r[1])


def _channel_family(cfg: RunConfig) -> dynamics.PauliChannelFamily:
    if cfg.config is not None:
        try:
            return dynamics.load_rates_config(cfg.config)
        except (OSError, ValueError) as exc:
            raise InputError("config", str(exc)) from None
    return _two_map_rates(cfg).family()


def _load_state(path: str):
    try:
        return io.load_state(path)
    except OSError as exc:
        raise InputError("state", str(exc)) from None
    except io.FormatError as exc:
        raise InputError("state", f"parse error: {exc}") from None


def cmd_decompose(cfg: RunConfig) -> int:
    rho = _load_state(cfg.state)
    try:
        fr = frames.make_frame(cfg.frame, rho.dim_s)
        result = opd.decompose(rho, fr)
    except opd.NotADensityError as exc:
        raise InputError("state", str(exc)) from None
    except ValueError as exc:
        raise InputError("state", str(exc)) from None
    if cfg.reduce:
        result = opd.reduce(result, cfg.tol)
    summary = {
        "frame": cfg.frame,
        "terms": result.term_count,
        "weights": result.weights.tolist(),
        "env_purities": [float(np.trace(r @ r).real) for r in result.env_states],
    }
    print(json.dumps(summary, indent=2))
    if cfg.out:
        io.save_opd(result, cfg.out)
    return EXIT_OK


def cmd_cost(cfg: RunConfig) -> int:
    rho = _load_state(cfg.state)
    try:
        n = opd.cost(rho, cfg.tol, frames.make_frame(cfg.frame, rho.dim_s))
    except opd.ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except ValueError as exc:
        raise InputError("state", str(exc)) from None
    print(n)
    return EXIT_OK


def cmd_evolve(cfg: RunConfig) -> int:
    family = _channel_family(cfg)
    if cfg.v is not None:
        decomposition = positivity.opd_from_v(cfg.v)
    else:
        try:
            decomposition = io.load_opd(cfg.opd_file)
        except (OSError, io.FormatError) as exc:
            raise InputError("opd", str(exc)) from None
    times = dynamics.default_time_grid(family)
    try:
        rows = dynamics.trajectory(decomposition, family, times)
    except ValueError as exc:
        raise InputError("opd", str(exc)) from None
    if cfg.out:
        dynamics.write_trajectory_csv(rows, cfg.out)
    worst = min(r["min_eig"] for r in rows)
    print(json.dumps({"points": len(rows), "min_eigenvalue": worst}, indent=2))
    return EXIT_OK


def cmd_positivity(cfg: RunConfig) -> int:
    rates = _two_map_rates(cfg)
    # with a named example the times are given as gamma * t
    scale = cfg.gamma if cfg.example is not None else 1.0
    times = [gt / scale for gt in cfg.gt]
    containment = []
    clouds = []
    for gt, t in zip(cfg.gt, times):
        c = positivity.ellipsoid_ball_containment(rates, t)
        oracle, _ = positivity.sphere_oracle_max(rates, t, cfg.oracle_points)
        containment.append(
            {
                "gt": gt,
                "t": t,
                "contained": c.contained,
                "max_distance_sq": c.max_distance_sq,
                "oracle_max_distance_sq": oracle,
                "witness": c.witness.tolist(),
            }
        )
        if cfg.out:
            clouds.append(positivity.sample_domain(rates, t, cfg.resolution))
    summary = {
        "rates": {"gamma": list(rates.gamma), "gamma_tilde": list(rates.gamma_tilde)},
        "times": times,
        "containment": containment,
    }
    if cfg.classify is not None:
        verdict = positivity.classify(cfg.classify, rates)
        summary["classification"] = {
            "v": cfg.classify,
            "verdict": verdict.kind.value,
            "asymptotic_g": verdict.asymptotic_g,
            "max_g": verdict.max_g,
            "first_exit_time": verdict.first_exit_time,
            "reentry_time": verdict.reentry_time,
        }
    if cfg.out:
        positivity.write_cloud_csv(clouds, cfg.out + ".csv")
        io.write_json(summary, cfg.out + ".json")
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = run_checks(cfg.seed, cfg.trials, cfg.corrupt_dual)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed (seed {cfg.seed}, trials {cfg.trials})")
    return EXIT_OK if failed == 0 else EXIT_CONSISTENCY


COMMANDS = {
    "decompose": cmd_decompose,
    "cost": cmd_cost,
    "evolve": cmd_evolve,
    "positivity": cmd_positivity,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="opdkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tol", type=float, default=1e-10, help="rank tolerance (relative)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None)

    def rate_source(sp):
        sp.add_argument("--example", choices=sorted(positivity.EXAMPLES))
        sp.add_argument("--gamma", type=float, default=1.0, help="rate unit of the examples")
        sp.add_argument("--rates", help="custom two-map rates 'g1,g2,g3;h1,h2,h3'")
        sp.add_argument("--config", help="plain-text rate file, one channel per line")

    sp = sub.add_parser("decompose", help="decompose a bipartite state on a positive frame")
    sp.add_argument("state")
    sp.add_argument("--frame", choices=["pauli", "basis"], default="pauli")
    sp.add_argument("--reduce", action="store_true", help="reduce to the minimal number of terms")
    common(sp)

    sp = sub.add_parser("cost", help="minimal number of OPD terms (= operator Schmidt rank)")
    sp.add_argument("state")
    sp.add_argument("--frame", choices=["pauli", "basis"], default="pauli")
    common(sp)
    sp.set_defaults(tol=1e-8)

    sp = sub.add_parser("evolve", help="term-wise Pauli-channel evolution, CSV trajectory")
    sp.add_argument("--v", type=_float_list)
    sp.add_argument("--opd", dest="opd_file")
    rate_source(sp)
    common(sp)

    sp = sub.add_parser("positivity", help="positivity-domain geometry and figure data")
    rate_source(sp)
    sp.add_argument("--gt", type=_float_list, default=[0.1, 0.5, 2.0], help="gamma*t values")
    sp.add_argument("--resolution", type=int, default=21)
    sp.add_argument("--classify", type=_float_list, help="classify one initial point v1,v2,v3")
    sp.add_argument("--oracle-points", type=int, default=100_000)
    common(sp)

    sp = sub.add_parser("verify", help="run the end-to-end self-checks")
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--corrupt-dual", action="store_true", help=argparse.SUPPRESS)
    common(sp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__})
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
