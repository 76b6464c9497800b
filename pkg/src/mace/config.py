"""Run configuration: a validated JSON document with embedded defaults.

Defaults mirror the pinned training hyperparameters (gamma 0.99, lam 0.01,
window 10, 30 z-bins, 300-step buffer); the parallel-env count defaults to
a desk-scale 16. Parsing rejects unknown keys so typos fail before any
rollout, and serialize(parse(file)) round-trips exactly.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .gridworld import TASKS
from .rewards import RewardConfig, RewardMode

OUTPUT_ROOT_ENV = "MACE_OUTPUT_ROOT"

# JSON spelling for fields whose Python name differs.
_JSON_ALIASES = {"lam": "lambda"}
_FIELD_FOR_JSON = {json_key: py_key for py_key, json_key in _JSON_ALIASES.items()}


@dataclass
class RunConfig:
    task: str = "pass"
    grid_size: int = 30
    max_steps: int = 300
    mode: str = "mace"
    lam: float = 0.01
    beta: float = 1.0
    gamma: float = 0.99
    w: int = 10
    K: int = 30
    num_envs: int = 16
    buffer_length: int = 300
    iterations: int = 300
    seeds: tuple = (0,)
    out_dir: str | None = None
    novelty: str = "count"
    posterior: str = "count"
    hindsight_weight: str = "relabeled"
    normalize_advantages: bool = True
    log_decomposition: bool = False
    decomp_from: int = 0
    decomp_to: int | None = None
    bus_trace: bool = False
    jobs: int = 1

    def __post_init__(self):
        self.task = str(self.task).lower()
        self.seeds = tuple(int(s) for s in self.seeds)
        self.validate()

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}; expected one of {sorted(TASKS)}")
        RewardMode(self.mode)
        RewardConfig(self.mode, lam=self.lam, beta=self.beta)
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        for name in ("grid_size", "max_steps", "w", "K", "num_envs", "buffer_length", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.novelty not in ("count", "rnd"):
            raise ValueError(f"unknown novelty backend {self.novelty!r}")
        if self.posterior not in ("count", "mlp"):
            raise ValueError(f"unknown posterior backend {self.posterior!r}")
        if self.hindsight_weight not in ("relabeled", "raw"):
            raise ValueError(f"hindsight_weight must be 'relabeled' or 'raw'")
        if self.decomp_from < 0:
            raise ValueError("decomp_from must be nonnegative")
        if self.decomp_to is not None and self.decomp_to <= self.decomp_from:
            raise ValueError("decomp_to must exceed decomp_from")

    @property
    def reward(self) -> RewardConfig:
        return RewardConfig(self.mode, lam=self.lam, beta=self.beta)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[_JSON_ALIASES.get(f.name, f.name)] = value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in data.items():
            name = _FIELD_FOR_JSON.get(key, key)
            if name not in known:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[name] = value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())


def output_root() -> str:
    """Root directory for run outputs; overridable via MACE_OUTPUT_ROOT."""
    return os.environ.get(OUTPUT_ROOT_ENV, "runs")
