"""Command-line entry point for training sweeps, ablations, the MI/WMI demo
sweep, and heatmap export."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig
from .harness import ablate, heatmap, heatmap_csv, heatmap_text, run
from .infotheory import wmi_demo_sweep


def _parse_grid(spec: str) -> np.ndarray:
    """Either comma-separated probabilities or start:stop:count."""
    if ":" in spec:
        start, stop, count = spec.split(":")
        return np.linspace(float(start), float(stop), int(count))
    return np.array([float(v) for v in spec.split(",")])


def cmd_train(args) -> int:
    cfg = RunConfig.from_file(args.config)
    result = run(cfg, name=args.name)
    print(f"run directory: {result.run_dir}")
    for summary in result.summaries:
        final = summary["final"] or {}
        print(f"seed {summary['seed']}: mean_episode_reward="
              f"{final.get('mean_episode_reward', 'n/a')} "
              f"success_rate={final.get('success_rate', 'n/a')} "
              f"bus_messages={summary['bus_messages']}")
    for seed, err in result.failures.items():
        print(f"seed {seed} FAILED: {err}", file=sys.stderr)
    return 1 if result.failures else 0


def cmd_ablate(args) -> int:
    cfg = RunConfig.from_file(args.config)
    joined = ablate(cfg, args.axis, name=args.name)
    print(f"ablation table: {joined}")
    return 0


def cmd_wmi_demo(args) -> int:
    rows = wmi_demo_sweep(_parse_grid(args.grid))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["p_a1", "mi_s1", "mi_s2", "wmi_s1", "wmi_s2"])
    for row in rows:
        writer.writerow([repr(v) for v in row])
    if args.out:
        out.close()
        print(f"wrote {args.out}")
    return 0


def cmd_heatmap(args) -> int:
    run_dir = Path(args.run_dir)
    cells = heatmap(run_dir, seed=args.seed, agent=args.agent,
                    component=args.component, iter_from=args.iter_from,
                    iter_to=args.iter_to)
    with open(run_dir / "config.json") as fh:
        grid_size = json.load(fh)["grid_size"]
    if args.out:
        heatmap_csv(cells, args.out)
        print(f"wrote {args.out}")
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(["x", "y", "mean"])
        for (x, y), value in sorted(cells.items()):
            writer.writerow([x, y, repr(value)])
    print(heatmap_text(cells, grid_size), file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mace", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run every seed of a config")
    p_train.add_argument("config", help="path to a run-config JSON file")
    p_train.add_argument("--name", default=None, help="run directory name under the output root")
    p_train.set_defaults(func=cmd_train)

    p_ablate = sub.add_parser("ablate", help="run an ablation matrix")
    p_ablate.add_argument("config")
    p_ablate.add_argument("--axis", required=True,
                          choices=["mode", "lambda", "w", "sum_vs_max"])
    p_ablate.add_argument("--name", default=None)
    p_ablate.set_defaults(func=cmd_ablate)

    p_demo = sub.add_parser("wmi-demo",
                            help="MI/WMI curves of the two illustrative states")
    p_demo.add_argument("--grid", default="0.05:0.95:19",
                        help="comma-separated p(a1) values or start:stop:count")
    p_demo.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p_demo.set_defaults(func=cmd_wmi_demo)

    p_heat = sub.add_parser("heatmap", help="per-cell mean intrinsic reward")
    p_heat.add_argument("run_dir")
    p_heat.add_argument("--seed", type=int, required=True)
    p_heat.add_argument("--agent", type=int, required=True)
    p_heat.add_argument("--component", choices=["nov", "hin"], required=True)
    p_heat.add_argument("--from", dest="iter_from", type=int, default=0)
    p_heat.add_argument("--to", dest="iter_to", type=int, default=None)
    p_heat.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p_heat.set_defaults(func=cmd_heatmap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
