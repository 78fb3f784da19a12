"""Point clouds and containment data for the two preset rate families.

Writes ``<outdir>/example_<name>.csv`` (one block of grid points per time)
and ``<outdir>/example_<name>.json`` (containment maxima per time plus the
classification of a few reference points).
"""
from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from opdkit import positivity


@dataclass
class FigureConfig:
    outdir: str = "figure_data"
    gamma: float = 1.0
    gt: list[float] = field(default_factory=lambda: [0.1, 0.5, 2.0])
    resolution: int = 31
    oracle_points: int = 1_000_000
    reference_points: list[list[float]] = field(
        default_factory=lambda: [[1.0, 1.0, 1.0], [1.0, 1.0, 1.5], [0.2, 1.0, 1.0], [1.0, 1.6, 1.6]]
    )


def run(cfg: FigureConfig) -> dict:
    out = Path(cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"config": asdict(cfg)}
    for name, build in positivity.EXAMPLES.items():
        rates = build(cfg.gamma)
        times = [gt / cfg.gamma for gt in cfg.gt]
        clouds, rows = [], []
        for gt, t in zip(cfg.gt, times):
            c = positivity.ellipsoid_ball_containment(rates, t)
            oracle, _ = positivity.sphere_oracle_max(rates, t, cfg.oracle_points)
            cloud = positivity.sample_domain(rates, t, cfg.resolution)
            clouds.append(cloud)
            inside = cloud.in_initial
            rows.append(
                {
                    "gt": gt,
                    "contained": c.contained,
                    "max_distance_sq": c.max_distance_sq,
                    "oracle_max_distance_sq": oracle,
                    "initial_points": int(inside.sum()),
                    "initial_points_leaving": int((inside & ~cloud.in_evolved).sum()),
                }
            )
        verdicts = {}
        for v in cfg.reference_points:
            res = positivity.classify(v, rates)
            verdicts[",".join(f"{x:g}" for x in v)] = {
                "verdict": res.kind.value,
                "asymptotic_g": res.asymptotic_g,
                "first_exit_time": res.first_exit_time,
                "reentry_time": res.reentry_time,
            }
        positivity.write_cloud_csv(clouds, out / f"example_{name}.csv")
        summary[name] = {"containment": rows, "reference_points": verdicts}
        (out / f"example_{name}.json").write_text(json.dumps(summary[name], indent=2))
    return summary


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--outdir", default=FigureConfig.outdir)
    p.add_argument("--gamma", type=float, default=FigureConfig.gamma)
    p.add_argument("--resolution", type=int, default=FigureConfig.resolution)
    p.add_argument("--oracle-points", type=int, default=FigureConfig.oracle_points)
    args = p.parse_args(argv)
    cfg = FigureConfig(args.outdir, args.gamma, resolution=args.resolution, oracle_points=args.oracle_points)
    summary = run(cfg)
    for name in positivity.EXAMPLES:
        for row in summary[name]["containment"]:
            print(
                f"example {name:>2}  gt={row['gt']:<4}  contained={row['contained']!s:<5}  "
                f"max d^2={row['max_distance_sq']:.6f}  oracle={row['oracle_max_distance_sq']:.6f}  "
                f"leaving {row['initial_points_leaving']}/{row['initial_points']}"
            )


if __name__ == "__main__":
    main()
