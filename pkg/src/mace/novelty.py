"""Per-agent local novelty: visit-count tables for grid observations, or a
random-distillation estimator for feature-vector observations.

Count novelty is 10 / sqrt(n(x, y)); visits are recorded before querying so
the count is always at least one. The distillation estimator scores novelty
as the L2 distance between a frozen randomly-initialized network and a
trained predictor.
"""

from __future__ import annotations

import numpy as np

from .nets import Adam, Mlp

COUNT_NOVELTY_SCALE = 10.0

RND_OUTPUT_DIM = 32
RND_TARGET_HIDDEN = (64, 64)
RND_PREDICTOR_HIDDEN = (64, 64, 64, 64)
RND_LEARNING_RATE = 3e-4


class VisitCounts:
    """Visit-count table for one agent over the (x, y) grid.

    Counts only ever increase; querying novelty for a never-recorded cell is
    a contract violation (record the visit first).
    """

    def __init__(self, grid_size: int):
        self.grid_size = int(grid_size)
        self.counts = np.zeros((grid_size, grid_size), dtype=np.int64)

    def record(self, obs) -> None:
        x, y = obs[0], obs[1]
        self.counts[x, y] += 1

    def record_batch(self, obs_batch) -> None:
        for obs in obs_batch:
            self.counts[obs[0], obs[1]] += 1

    def novelty(self, obs) -> float:
        n = self.counts[obs[0], obs[1]]
        if n == 0:
            raise ValueError(f"novelty queried for unvisited cell ({obs[0]}, {obs[1]})")
        return COUNT_NOVELTY_SCALE / float(np.sqrt(n))

    def novelty_batch(self, obs_batch) -> np.ndarray:
        xs = np.fromiter((o[0] for o in obs_batch), dtype=np.intp, count=len(obs_batch))
        ys = np.fromiter((o[1] for o in obs_batch), dtype=np.intp, count=len(obs_batch))
        n = self.counts[xs, ys]
        if np.any(n == 0):
            bad = int(np.argmax(n == 0))
            raise ValueError(f"novelty queried for unvisited cell {tuple(obs_batch[bad][:2])}")
        return COUNT_NOVELTY_SCALE / np.sqrt(n.astype(np.float64))

    def dump(self) -> str:
        """Plain-text matrix of counts, rows indexed by y."""
        return "\n".join(
            " ".join(str(int(self.counts[x, y])) for x in range(self.grid_size))
            for y in range(self.grid_size)
        )


class RndNovelty:
    """Random-distillation novelty over float feature vectors.

    The target net is generated once and frozen; the predictor is trained to
    match it, so often-seen inputs score low. No reward or observation
    normalization is applied.
    """

    def __init__(self, obs_dim: int, rng: np.random.Generator, output_dim: int = RND_OUTPUT_DIM,
                 lr: float = RND_LEARNING_RATE):
        self.target = Mlp([obs_dim, *RND_TARGET_HIDDEN, output_dim], head="linear", rng=rng)
        self.predictor = Mlp([obs_dim, *RND_PREDICTOR_HIDDEN, output_dim], head="linear", rng=rng)
        self.optimizer = Adam(self.predictor, lr=lr)

    def novelty(self, x) -> float:
        return float(self.novelty_batch(np.asarray(x, dtype=np.float64)[None, :])[0])

    def novelty_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        diff = self.predictor.forward(X) - self.target.forward(X)
        return np.sqrt(np.sum(diff * diff, axis=1))

    def update(self, X) -> float:
        """One optimizer step on the mean squared prediction error."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("update needs a nonempty batch of feature vectors")
        pred = self.predictor.forward(X)
        frozen = self.target.forward(X)
        err = pred - frozen
        grads = self.predictor.backward(2.0 * err / err.size)
        self.optimizer.step(grads)
        return float(np.mean(err * err))

    def target_fingerprint(self) -> str:
        return self.target.fingerprint()
