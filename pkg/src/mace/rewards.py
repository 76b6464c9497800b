"""Shaped-reward machinery: accumulated novelty, percentile relabeling,
windowed action posteriors, and the hindsight bonus in all its variants.

The hindsight bonus pays agent i for actions associated with other agents'
high future novelty: z~ * log(p_hat(a | o, z~-bin) / pi(a | o)), computable
only after the episode ends because the accumulated novelty z~ looks
forward. Averaged over on-policy samples it estimates the weighted mutual
information between the action and the other agent's accumulated novelty.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .nets import Adam, Mlp

RELABEL_LABELS = (0.1, 0.3, 0.5, 0.7, 0.9)
RELABEL_PERCENTILES = (20, 40, 60, 80)
POSTERIOR_FLOOR = 1e-6

MLP_POSTERIOR_HIDDEN = (64, 64)
MLP_POSTERIOR_LR = 3e-4
MLP_POSTERIOR_EPOCHS = 40


class RewardMode(str, Enum):
    """Which shaped-reward variant trains the agents."""

    LOC = "loc"            # own local novelty only
    NOV_SUM = "nov_sum"    # summed novelties approximate the global novelty
    NOV_MAX = "nov_max"    # max instead of sum (ablation)
    HIN = "hin"            # own novelty + hindsight bonus
    MACE = "mace"          # summed novelties + hindsight bonus
    MACE_MI = "mace_mi"    # hindsight bonus without the z~ weight (log term only)
    MACE_Z = "mace_z"      # hindsight bonus replaced by z~ itself
    MACE_S = "mace_s"      # MACE with the scalable (summed-z) bonus
    HIN_S = "hin_s"        # HIN with the scalable bonus


HINDSIGHT_MODES = frozenset({RewardMode.HIN, RewardMode.MACE, RewardMode.MACE_MI})
SCALABLE_MODES = frozenset({RewardMode.MACE_S, RewardMode.HIN_S})


@dataclass(frozen=True)
class RewardConfig:
    mode: RewardMode
    lam: float = 0.01
    beta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mode", RewardMode(self.mode))
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


def accumulate(u, gamma: float) -> np.ndarray:
    """Discounted backward recursion z_t = u_t + gamma * z_{t+1}."""
    u = np.asarray(u, dtype=np.float64)
    z = np.zeros_like(u)
    carry = 0.0
    for t in range(len(u) - 1, -1, -1):
        carry = u[t] + gamma * carry
        z[t] = carry
    return z


def accumulate_episodes(u, dones, gamma: float) -> np.ndarray:
    """Backward recursion that restarts at episode boundaries.

    dones[t] marks the step that ended an episode; z never crosses it.
    """
    u = np.asarray(u, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    z = np.zeros_like(u)
    carry = 0.0
    for t in range(len(u) - 1, -1, -1):
        carry = u[t] + (0.0 if dones[t] else gamma * carry)
        z[t] = carry
    return z


@dataclass(frozen=True)
class RelabelBins:
    """20/40/60/80th nearest-rank percentile edges of one sampling batch."""

    edges: tuple

    def apply(self, values) -> np.ndarray:
        """Map each value to its bin label; ties on an edge go to the lower bin."""
        values = np.asarray(values, dtype=np.float64)
        idx = np.searchsorted(np.asarray(self.edges), values, side="left")
        return np.asarray(RELABEL_LABELS)[idx]


def nearest_rank_percentile(sorted_values: np.ndarray, p: float) -> float:
    """p-th percentile as the ceil(p/100 * n)-th smallest value."""
    n = len(sorted_values)
    rank = max(1, math.ceil(p / 100.0 * n))
    return float(sorted_values[rank - 1])


def relabel(batch_values):
    """Percentile-relabel a batch of novelties onto {0.1, 0.3, 0.5, 0.7, 0.9}.

    Returns (RelabelBins, relabeled array). Relabeling is invariant to
    positive rescaling of the batch.
    """
    values = np.asarray(batch_values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot relabel an empty batch")
    flat = np.sort(values.ravel())
    bins = RelabelBins(edges=tuple(nearest_rank_percentile(flat, p) for p in RELABEL_PERCENTILES))
    return bins, bins.apply(values)


def discretize_z(z, n_bins: int, gamma: float, scale: float = 1.0):
    """Uniform-width bin index over [0.1, 0.9] * scale / (1 - gamma).

    Values below the range clamp to bin 0 (finite episodes undershoot the
    infinite-horizon bound); the upper edge lands in the last bin. `scale`
    widens the range for summed accumulated novelties.
    """
    if n_bins < 1:
        raise ValueError("need at least one bin")
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    z = np.asarray(z, dtype=np.float64)
    lo = scale * RELABEL_LABELS[0] / (1.0 - gamma)
    hi = scale * RELABEL_LABELS[-1] / (1.0 - gamma)
    idx = np.floor((z - lo) / (hi - lo) * n_bins).astype(np.int64)
    return np.clip(idx, 0, n_bins - 1)


class CountPosterior:
    """Count-table posterior p_hat(a | obs, z-bin) over a rolling window.

    One table per channel (an ordered agent pair, or a single agent for the
    scalable variant). The window holds the last `window` inserted batches;
    evicting a batch removes exactly its contributions. Queries are
    read-only; an unseen (obs, bin) pair falls back to uniform.
    """

    def __init__(self, channels, num_actions: int, window: int):
        if window < 1:
            raise ValueError("window must be at least 1")
        self.num_actions = int(num_actions)
        self.window = int(window)
        self._agg = {ch: {} for ch in channels}
        self._batches = deque()

    @property
    def channels(self):
        return tuple(self._agg)

    @property
    def batches_held(self) -> int:
        return len(self._batches)

    def insert_batch(self, batch: dict) -> None:
        """batch maps channel -> iterable of (obs_key, action, z_bin)."""
        per_batch = {}
        for ch, samples in batch.items():
            if ch not in self._agg:
                raise KeyError(f"unknown channel {ch!r}")
            table = per_batch.setdefault(ch, {})
            agg = self._agg[ch]
            for obs_key, action, z_bin in samples:
                key = (obs_key, int(z_bin))
                row = table.get(key)
                if row is None:
                    row = np.zeros(self.num_actions, dtype=np.int64)
                    table[key] = row
                row[action] += 1
                agg_row = agg.get(key)
                if agg_row is None:
                    agg_row = np.zeros(self.num_actions, dtype=np.int64)
                    agg[key] = agg_row
                agg_row[action] += 1
        self._batches.append(per_batch)
        if len(self._batches) > self.window:
            self._evict(self._batches.popleft())

    def _evict(self, per_batch: dict) -> None:
        for ch, table in per_batch.items():
            agg = self._agg[ch]
            for key, row in table.items():
                agg_row = agg[key]
                agg_row -= row
                if not agg_row.any():
                    del agg[key]

    def counts(self, channel, obs_key, z_bin) -> np.ndarray:
        row = self._agg[channel].get((obs_key, int(z_bin)))
        if row is None:
            return np.zeros(self.num_actions, dtype=np.int64)
        return row.copy()

    def query(self, channel, obs_key, z_bin) -> np.ndarray:
        """Empirical p_hat(a | obs, bin); uniform when the pair is unseen."""
        row = self._agg[channel].get((obs_key, int(z_bin)))
        if row is None:
            return np.full(self.num_actions, 1.0 / self.num_actions)
        total = int(row.sum())
        if total == 0:
            return np.full(self.num_actions, 1.0 / self.num_actions)
        return row / total


class MlpPosterior:
    """Function-approximator posterior backend.

    One softmax net per channel maps (observation features, scaled z) to an
    action distribution, trained by cross-entropy on the same rolling window
    of batches the count backend would hold.
    """

    def __init__(self, channels, num_actions: int, window: int, feature_dim: int,
                 rng: np.random.Generator, z_scale: float = 1.0,
                 epochs: int = MLP_POSTERIOR_EPOCHS, lr: float = MLP_POSTERIOR_LR):
        if window < 1:
            raise ValueError("window must be at least 1")
        self.num_actions = int(num_actions)
        self.window = int(window)
        self.z_scale = float(z_scale)
        self.epochs = int(epochs)
        self._nets = {
            ch: Mlp([feature_dim + 1, *MLP_POSTERIOR_HIDDEN, num_actions], head="softmax", rng=rng)
            for ch in channels
        }
        self._opts = {ch: Adam(net, lr=lr) for ch, net in self._nets.items()}
        self._batches = deque()

    @property
    def channels(self):
        return tuple(self._nets)

    def insert_batch(self, batch: dict) -> None:
        """batch maps channel -> (features [B, D], actions [B], z values [B])."""
        self._batches.append({
            ch: (np.asarray(X, dtype=np.float64), np.asarray(a, dtype=np.int64),
                 np.asarray(z, dtype=np.float64))
            for ch, (X, a, z) in batch.items()
        })
        if len(self._batches) > self.window:
            self._batches.popleft()
        self._fit()

    def _inputs(self, X, z):
        return np.concatenate([X, (self.z_scale * z)[:, None]], axis=1)

    def _fit(self) -> None:
        for ch, net in self._nets.items():
            chunks = [b[ch] for b in self._batches if ch in b]
            if not chunks:
                continue
            X = np.concatenate([self._inputs(Xc, zc) for Xc, _, zc in chunks])
            a = np.concatenate([ac for _, ac, _ in chunks])
            rows = np.arange(len(a))
            for _ in range(self.epochs):
                probs = net.forward(X)
                grad = np.zeros_like(probs)
                # cross-entropy: dL/dp[a] = -1 / (B * p[a])
                grad[rows, a] = -1.0 / (len(a) * np.maximum(probs[rows, a], 1e-12))
                self._opts[ch].step(net.backward(grad))

    def query(self, channel, features, z) -> np.ndarray:
        x = np.concatenate([np.asarray(features, dtype=np.float64), [self.z_scale * float(z)]])
        return self._nets[channel].forward(x)

    def query_batch(self, channel, features, z) -> np.ndarray:
        X = self._inputs(np.asarray(features, dtype=np.float64),
                         np.asarray(z, dtype=np.float64))
        return self._nets[channel].forward(X)


def log_posterior_ratio(p_action, pi_action, floor: float = POSTERIOR_FLOOR):
    """log(p_hat / pi) with the posterior clamped away from zero."""
    return np.log(np.maximum(p_action, floor)) - np.log(pi_action)


def hindsight_bonus(z_weight, p_action, pi_action, floor: float = POSTERIOR_FLOOR):
    """Per-pair hindsight bonus z~ * log(p_hat(a|o,bin) / pi(a|o)).

    `p_action` is the posterior probability of the taken action conditioned
    on the other agent's accumulated-novelty bin; `pi_action` the behavior
    policy's probability at collection time.
    """
    return z_weight * log_posterior_ratio(p_action, pi_action, floor)


def scalable_hindsight_bonus(z_sum_others, p_action, pi_action, floor: float = POSTERIOR_FLOOR):
    """Scalable variant: one bonus against the sum of all other agents'
    accumulated novelties, whose posterior conditions on the summed-z bin."""
    return z_sum_others * log_posterior_ratio(p_action, pi_action, floor)


def shaped_reward_parts(config: RewardConfig, u_all, agent: int,
                        z_others=None, log_ratios_others=None,
                        z_sum_others=None, log_ratio_sum=None):
    """Novelty and hindsight components of one agent's intrinsic reward.

    u_all has the per-agent novelties along the last axis; the hindsight
    inputs carry one entry per other agent (standard modes) or a single
    summed term (scalable modes). Works on scalars or stacked arrays.
    Returns (novelty_part, hindsight_part), each already scaled by beta
    (and lam for the hindsight part), so the shaped reward is
    r_ext + novelty_part + hindsight_part.
    """
    u_all = np.asarray(u_all, dtype=np.float64)
    u_own = u_all[..., agent]
    mode = config.mode
    zero = np.zeros_like(u_own)
    if mode is RewardMode.LOC:
        return config.beta * u_own, zero
    if mode is RewardMode.NOV_SUM:
        return config.beta * u_all.sum(axis=-1), zero
    if mode is RewardMode.NOV_MAX:
        return config.beta * u_all.max(axis=-1), zero

    if mode in (RewardMode.HIN, RewardMode.MACE):
        if z_others is None or log_ratios_others is None:
            raise ValueError(f"mode {mode.value} needs z_others and log_ratios_others")
        bonus = (np.asarray(z_others) * np.asarray(log_ratios_others)).sum(axis=-1)
    elif mode is RewardMode.MACE_MI:
        if log_ratios_others is None:
            raise ValueError("mode mace_mi needs log_ratios_others")
        bonus = np.asarray(log_ratios_others).sum(axis=-1)
    elif mode is RewardMode.MACE_Z:
        if z_others is None:
            raise ValueError("mode mace_z needs z_others")
        bonus = np.asarray(z_others).sum(axis=-1)
    elif mode in SCALABLE_MODES:
        if z_sum_others is None or log_ratio_sum is None:
            raise ValueError(f"mode {mode.value} needs z_sum_others and log_ratio_sum")
        bonus = np.asarray(z_sum_others) * np.asarray(log_ratio_sum)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown reward mode {mode!r}")

    base = u_own if mode in (RewardMode.HIN, RewardMode.HIN_S) else u_all.sum(axis=-1)
    return config.beta * base, config.beta * (config.lam * bonus)


def shaped_reward(config: RewardConfig, r_ext, u_all, agent: int,
                  z_others=None, log_ratios_others=None,
                  z_sum_others=None, log_ratio_sum=None):
    """One agent's shaped reward r_ext + novelty part + hindsight part."""
    nov, hin = shaped_reward_parts(config, u_all, agent,
                                   z_others=z_others,
                                   log_ratios_others=log_ratios_others,
                                   z_sum_others=z_sum_others,
                                   log_ratio_sum=log_ratio_sum)
    return np.asarray(r_ext, dtype=np.float64) + nov + hin
