"""Experiment driver: seeded multi-run sweeps, ablation matrices, aggregate
curves, and position-binned heatmaps of the reward decomposition.

A run directory holds the config copy, one curve CSV per seed, a summary
JSON per seed (communication budget, final metrics, checkpoint paths), and
an aggregate CSV with the row-wise mean and standard error across seeds.
All CSV floats are written with repr precision so reruns are byte-identical
and aggregate means are exact.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig, output_root
from .ippo import train

CURVE_COLUMNS = ("iteration", "env_steps", "mean_episode_reward",
                 "mean_r_nov", "mean_r_hin", "success_rate")

ABLATION_AXES = {
    "mode": [("mode", m) for m in ("loc", "nov_sum", "hin", "mace")],
    "lambda": [("lam", v) for v in (0.1, 0.01, 0.001)],
    "w": [("w", v) for v in (1, 10, 50)],
    "sum_vs_max": [("mode", m) for m in ("nov_sum", "nov_max")],
}

DECOMP_COLUMNS = ("iteration", "t", "env", "agent", "x", "y", "r_ext", "r_nov", "r_hin")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def curve_path(run_dir: Path, seed: int) -> Path:
    return Path(run_dir) / f"curve_seed{seed}.csv"


def decomp_path(run_dir: Path, seed: int) -> Path:
    return Path(run_dir) / f"decomp_seed{seed}.csv"


def summary_path(run_dir: Path, seed: int) -> Path:
    return Path(run_dir) / f"summary_seed{seed}.json"


def write_curve(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in CURVE_COLUMNS])


def read_curve(path) -> list:
    with open(path) as fh:
        reader = csv.DictReader(fh)
        return [
            {k: (int(v) if k in ("iteration", "env_steps") else float(v))
             for k, v in row.items()}
            for row in reader
        ]


def run_seed(cfg: RunConfig, seed: int, run_dir) -> dict:
    """Train one seed and write its curve, summary, and checkpoints."""
    run_dir = Path(run_dir)
    decomp_file = None
    decomp_writer = None
    if cfg.log_decomposition:
        decomp_file = open(decomp_path(run_dir, seed), "w", newline="")
        decomp_writer = csv.writer(decomp_file)
        decomp_writer.writerow(DECOMP_COLUMNS)
    trace = run_dir / f"bus_trace_seed{seed}.csv" if cfg.bus_trace else None
    try:
        result = train(cfg, seed, decomp_writer=decomp_writer, bus_trace_path=trace)
    finally:
        if decomp_file is not None:
            decomp_file.close()

    write_curve(curve_path(run_dir, seed), result.curve)
    checkpoints = {}
    for i, learner in enumerate(result.learners):
        pol = run_dir / f"policy_agent{i}_seed{seed}.bin"
        val = run_dir / f"value_agent{i}_seed{seed}.bin"
        learner.policy.save(pol)
        learner.value.save(val)
        checkpoints[f"agent{i}"] = {"policy": pol.name, "value": val.name}

    final = result.curve[-1] if result.curve else None
    summary = {
        "seed": seed,
        "num_agents": result.spec.num_agents,
        "env_steps": result.env_steps,
        "bus_messages": result.bus_messages,
        "eval_bus_messages": result.eval_bus_messages,
        "eval_return": result.eval_return,
        "eval_success": result.eval_success,
        "final": final,
        "checkpoints": checkpoints,
    }
    with open(summary_path(run_dir, seed), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _run_seed_worker(cfg_dict: dict, seed: int, run_dir: str) -> dict:
    return run_seed(RunConfig.from_dict(cfg_dict), seed, run_dir)


@dataclass
class RunResult:
    run_dir: Path
    summaries: list
    failures: dict       # seed -> error string for seeds that aborted


def resolve_run_dir(cfg: RunConfig, name: str | None = None) -> Path:
    if cfg.out_dir is not None:
        return Path(cfg.out_dir)
    return Path(output_root()) / (name or f"{cfg.task}_{cfg.mode}")


def run(cfg: RunConfig, name: str | None = None) -> RunResult:
    """Execute all seeds of a config; an I/O failure aborts that seed only.

    Seeds run in parallel processes when cfg.jobs > 1 (outputs are per-seed
    files, so there are no shared writes).
    """
    run_dir = resolve_run_dir(cfg, name)
    run_dir.mkdir(parents=True, exist_ok=True)
    cfg.save(run_dir / "config.json")

    summaries = []
    failures = {}
    if cfg.jobs > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = {
                seed: pool.submit(_run_seed_worker, cfg.to_dict(), seed, str(run_dir))
                for seed in cfg.seeds
            }
            for seed, fut in futures.items():
                try:
                    summaries.append(fut.result())
                except Exception as exc:  # seed-level isolation
                    failures[seed] = str(exc)
    else:
        for seed in cfg.seeds:
            try:
                summaries.append(run_seed(cfg, seed, run_dir))
            except OSError as exc:
                failures[seed] = str(exc)

    done_seeds = [s["seed"] for s in summaries]
    if done_seeds:
        write_aggregate(run_dir, done_seeds)
    return RunResult(run_dir=run_dir, summaries=summaries, failures=failures)


def write_aggregate(run_dir, seeds) -> Path:
    """Row-wise mean and standard error across the per-seed curves."""
    run_dir = Path(run_dir)
    curves = [read_curve(curve_path(run_dir, s)) for s in seeds]
    n_rows = min(len(c) for c in curves)
    metrics = CURVE_COLUMNS[2:]
    out = run_dir / "aggregate.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["iteration", "env_steps"]
        for m in metrics:
            header += [f"{m}_mean", f"{m}_sem"]
        writer.writerow(header)
        for r in range(n_rows):
            row = [curves[0][r]["iteration"], curves[0][r]["env_steps"]]
            for m in metrics:
                vals = np.array([c[r][m] for c in curves])
                mean = float(np.mean(vals))
                sem = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
                row += [_fmt(mean), _fmt(sem)]
            writer.writerow(row)
    return out


def ablate(base_cfg: RunConfig, axis: str, name: str | None = None) -> Path:
    """Run an ablation matrix along one axis and join the aggregates.

    Axes: mode {loc, nov_sum, hin, mace}, lambda {0.1, 0.01, 0.001},
    w {1, 10, 50}, sum_vs_max {nov_sum, nov_max}. The joined CSV is keyed
    by variant.
    """
    if axis not in ABLATION_AXES:
        raise ValueError(f"unknown ablation axis {axis!r}; expected one of {sorted(ABLATION_AXES)}")
    root = resolve_run_dir(base_cfg, name or f"{base_cfg.task}_ablate_{axis}")
    root.mkdir(parents=True, exist_ok=True)
    joined = root / "ablation.csv"
    rows = []
    for field_name, value in ABLATION_AXES[axis]:
        variant = f"{field_name}={value}"
        cfg = base_cfg.replace(**{field_name: value, "out_dir": str(root / variant.replace('=', '_'))})
        result = run(cfg)
        agg = result.run_dir / "aggregate.csv"
        if not agg.exists():
            continue
        with open(agg) as fh:
            for row in csv.DictReader(fh):
                rows.append({"variant": variant, **row})
    if rows:
        with open(joined, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return joined


def heatmap(run_dir, seed: int, agent: int, component: str,
            iter_from: int = 0, iter_to: int | None = None):
    """Per-cell mean of one intrinsic component over an update window.

    Reads the per-step decomposition log; cells never visited in the window
    are absent from the result (not zero). Returns {(x, y): mean}.
    """
    if component not in ("nov", "hin"):
        raise ValueError("component must be 'nov' or 'hin'")
    path = decomp_path(Path(run_dir), seed)
    if not path.exists():
        raise FileNotFoundError(
            f"{path} missing: the run was not configured to log the reward decomposition")
    col = f"r_{component}"
    sums = {}
    counts = {}
    with open(path) as fh:
        for row in csv.DictReader(fh):
            it = int(row["iteration"])
            if it < iter_from or (iter_to is not None and it >= iter_to):
                continue
            if int(row["agent"]) != agent:
                continue
            key = (int(row["x"]), int(row["y"]))
            sums[key] = sums.get(key, 0.0) + float(row[col])
            counts[key] = counts.get(key, 0) + 1
    return {cell: sums[cell] / counts[cell] for cell in sums}


def heatmap_csv(cells: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "mean"])
        for (x, y), value in sorted(cells.items()):
            writer.writerow([x, y, _fmt(value)])


def heatmap_text(cells: dict, grid_size: int) -> str:
    """Whitespace-aligned grid; unvisited cells print as a dot."""
    if cells:
        width = max(len(f"{v:.3f}") for v in cells.values())
    else:
        width = 5
    lines = []
    for y in range(grid_size):
        row = []
        for x in range(grid_size):
            value = cells.get((x, y))
            row.append("." .rjust(width) if value is None else f"{value:.3f}".rjust(width))
        lines.append(" ".join(row))
    return "\n".join(lines)
