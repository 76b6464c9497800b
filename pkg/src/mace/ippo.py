"""Independent PPO per agent, trained on communicated-novelty shaped rewards.

Each agent owns an unshared feed-forward policy and value net. A training
iteration resets the parallel envs, collects a fixed-length window while
agents exchange local novelty over the bus, then finishes the rewards in
hindsight (relabel, accumulate within episodes, posterior update) and runs
clipped-surrogate PPO per agent. Evaluation rollouts act greedily and never
touch the bus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bus import NoveltyBus
from .config import RunConfig
from .gridworld import NUM_ACTIONS, GridEnv, make_task
from .nets import Adam, Mlp
from .novelty import RndNovelty, VisitCounts
from .rewards import (
    CountPosterior,
    HINDSIGHT_MODES,
    MlpPosterior,
    POSTERIOR_FLOOR,
    RewardMode,
    SCALABLE_MODES,
    accumulate_episodes,
    discretize_z,
    relabel,
    shaped_reward_parts,
)

POLICY_HIDDEN = (64, 64)
ACTOR_LR = 7e-4
CRITIC_LR = 7e-4
GAE_LAMBDA = 0.95
PPO_CLIP = 0.2
ENTROPY_COEF = 0.05
HUBER_DELTA = 10.0
PPO_EPOCHS = 10
PPO_MINI_BATCHES = 1  # full-batch updates


def obs_feature_dim(grid_size: int, obs_dim: int) -> int:
    return 2 * grid_size + (obs_dim - 2)


def encode_obs(obs, grid_size: int) -> np.ndarray:
    """Net input features: one-hot x, one-hot y, raw door flags.

    One-hot coordinates keep the policy's per-cell preferences from
    interfering with each other, which matters for the rare critical cells
    (switches, door mouths) that drive coordination.
    """
    raw = np.asarray(obs, dtype=np.int64)
    single = raw.ndim == 1
    if single:
        raw = raw[None, :]
    n = raw.shape[0]
    flags = raw.shape[1] - 2
    out = np.zeros((n, 2 * grid_size + flags))
    rows = np.arange(n)
    out[rows, raw[:, 0]] = 1.0
    out[rows, grid_size + raw[:, 1]] = 1.0
    out[:, 2 * grid_size:] = raw[:, 2:]
    return out[0] if single else out


def seed_streams(run_seed: int, num_agents: int, num_envs: int):
    """Documented seed split: SeedSequence(run_seed) spawns, in order,
    per-agent net-init streams, per-(env, agent) action streams, and one
    auxiliary stream (novelty / posterior backends)."""
    root = np.random.SeedSequence(run_seed)
    net_ss, action_ss, aux_ss = root.spawn(3)
    net_rngs = [np.random.default_rng(s) for s in net_ss.spawn(num_agents)]
    action_rngs = [
        [np.random.default_rng(s) for s in env_ss.spawn(num_agents)]
        for env_ss in action_ss.spawn(num_envs)
    ]
    return net_rngs, action_rngs, np.random.default_rng(aux_ss)


class AgentLearner:
    """One agent's unshared policy (softmax over 4 moves) and value net."""

    def __init__(self, obs_dim: int, rng: np.random.Generator):
        self.policy = Mlp([obs_dim, *POLICY_HIDDEN, NUM_ACTIONS], head="softmax", rng=rng)
        self.value = Mlp([obs_dim, *POLICY_HIDDEN, 1], head="linear", rng=rng)
        self.policy_opt = Adam(self.policy, lr=ACTOR_LR)
        self.value_opt = Adam(self.value, lr=CRITIC_LR)

    def values(self, X: np.ndarray) -> np.ndarray:
        return self.value.forward(X)[:, 0]


@dataclass
class RolloutData:
    """One sampling window across all parallel envs.

    Arrays are [T, E] (shared) or [N, T, E] (per agent); `u` holds the
    novelties every agent received over the bus, own value included.
    """

    obs_keys: list            # [N][T][E] raw observation tuples
    X: np.ndarray             # [N, T, E, D] encoded net inputs
    actions: np.ndarray       # [N, T, E]
    logp_old: np.ndarray      # [N, T, E]
    values_old: np.ndarray    # [N, T, E]
    r_ext: np.ndarray         # [T, E]
    done: np.ndarray          # [T, E]
    u: np.ndarray             # [N, T, E]
    bootstrap: np.ndarray     # [N, E] value estimate past the buffer end
    episodes: list            # (extrinsic return, success, length) per finished episode

    @property
    def steps(self) -> int:
        return self.r_ext.size


class CountBackend:
    """Shared per-agent visit tables; a step's visits are recorded for every
    env before any novelty is queried, so counts are at least one and the
    result is independent of env ordering."""

    def __init__(self, num_agents: int, grid_size: int):
        self.tables = [VisitCounts(grid_size) for _ in range(num_agents)]

    def observe(self, agent: int, next_obs_batch, X_next) -> np.ndarray:
        del X_next
        self.tables[agent].record_batch(next_obs_batch)
        return self.tables[agent].novelty_batch(next_obs_batch)

    def end_iteration(self) -> None:
        pass


class RndBackend:
    """Random-distillation novelty; the predictor trains with the PPO epoch
    count on the iteration's batch of next observations."""

    def __init__(self, num_agents: int, obs_dim: int, rng: np.random.Generator):
        self.estimators = [RndNovelty(obs_dim, rng=rng) for _ in range(num_agents)]
        self._pending = [[] for _ in range(num_agents)]

    def observe(self, agent: int, next_obs_batch, X_next) -> np.ndarray:
        del next_obs_batch
        self._pending[agent].append(np.array(X_next))
        return self.estimators[agent].novelty_batch(X_next)

    def end_iteration(self) -> None:
        for agent, chunks in enumerate(self._pending):
            if chunks:
                X = np.concatenate(chunks)
                for _ in range(PPO_EPOCHS):
                    self.estimators[agent].update(X)
        self._pending = [[] for _ in self._pending]


def make_novelty_backend(cfg: RunConfig, num_agents: int, obs_dim: int, rng):
    if cfg.novelty == "rnd":
        return RndBackend(num_agents, obs_dim, rng)
    return CountBackend(num_agents, cfg.grid_size)


def sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probs)
    return min(int(np.searchsorted(cdf, rng.random())), len(probs) - 1)


def collect_rollout(envs, learners, novelty, bus: NoveltyBus, T: int, action_rngs) -> RolloutData:
    """Run the synchronous act / observe / communicate loop for T steps.

    Envs are reset at the start of the window and auto-reset on episode end.
    Per step: every agent acts, observes, records its next observation's
    visit, broadcasts the resulting novelty on the per-env frame, and stores
    the full set it collected.
    """
    num_agents = envs[0].spec.num_agents
    num_envs = len(envs)
    grid = envs[0].spec.grid_size
    feat_dim = obs_feature_dim(grid, envs[0].spec.obs_dim)
    obs = []
    for env in envs:
        _, o = env.reset()
        obs.append(list(o))

    obs_keys = [[[None] * num_envs for _ in range(T)] for _ in range(num_agents)]
    X = np.zeros((num_agents, T, num_envs, feat_dim))
    actions = np.zeros((num_agents, T, num_envs), dtype=np.int64)
    logp_old = np.zeros((num_agents, T, num_envs))
    values_old = np.zeros((num_agents, T, num_envs))
    r_ext = np.zeros((T, num_envs))
    done = np.zeros((T, num_envs), dtype=bool)
    u = np.zeros((num_agents, T, num_envs))
    episodes = []
    ep_return = np.zeros(num_envs)
    ep_len = np.zeros(num_envs, dtype=np.int64)

    for t in range(T):
        joint_actions = [[0] * num_agents for _ in range(num_envs)]
        for i in range(num_agents):
            step_obs = [obs[e][i] for e in range(num_envs)]
            Xi = encode_obs(step_obs, grid)
            probs = learners[i].policy.forward(Xi)
            values_old[i, t] = learners[i].values(Xi)
            X[i, t] = Xi
            for e in range(num_envs):
                obs_keys[i][t][e] = step_obs[e]
                a = sample_action(probs[e], action_rngs[e][i])
                joint_actions[e][i] = a
                actions[i, t, e] = a
                logp_old[i, t, e] = np.log(probs[e, a])

        next_obs = [None] * num_envs
        for e, env in enumerate(envs):
            _, o, r, d = env.step(joint_actions[e])
            next_obs[e] = o
            r_ext[t, e] = r
            done[t, e] = d
            ep_return[e] += r
            ep_len[e] += 1

        u_sent = np.zeros((num_agents, num_envs))
        for i in range(num_agents):
            batch = [next_obs[e][i] for e in range(num_envs)]
            u_sent[i] = novelty.observe(i, batch, encode_obs(batch, grid))
        for e in range(num_envs):
            frame = bus.open_frame((t, e))
            for i in range(num_agents):
                frame.send(i, u_sent[i, e])
            for i in range(num_agents):
                u[:, t, e] = frame.collect(i)

        for e, env in enumerate(envs):
            if done[t, e]:
                episodes.append((float(ep_return[e]), bool(r_ext[t, e] > 0.0), int(ep_len[e])))
                ep_return[e] = 0.0
                ep_len[e] = 0
                _, o = env.reset()
                obs[e] = list(o)
            else:
                obs[e] = list(next_obs[e])

    bootstrap = np.zeros((num_agents, num_envs))
    live = ~done[T - 1]
    if np.any(live):
        for i in range(num_agents):
            Xi = encode_obs([obs[e][i] for e in range(num_envs)], grid)
            bootstrap[i] = np.where(live, learners[i].values(Xi), 0.0)

    return RolloutData(obs_keys=obs_keys, X=X, actions=actions, logp_old=logp_old,
                       values_old=values_old, r_ext=r_ext, done=done, u=u,
                       bootstrap=bootstrap, episodes=episodes)


def evaluate_rollout(spec, learners, max_steps: int | None = None):
    """One greedy episode with communication disabled; returns
    (extrinsic return, success flag, length)."""
    env = GridEnv(spec)
    _, obs = env.reset()
    limit = max_steps if max_steps is not None else spec.max_steps
    total = 0.0
    for _ in range(limit):
        actions = []
        for i, learner in enumerate(learners):
            probs = learner.policy.forward(encode_obs(obs[i], spec.grid_size))
            actions.append(int(np.argmax(probs)))
        _, obs, r, d = env.step(actions)
        total += r
        if d:
            return total, r > 0.0, env.state.steps_elapsed
    return total, False, env.state.steps_elapsed


def gae(rewards, values, dones, gamma: float, lam: float = GAE_LAMBDA, bootstrap=0.0):
    """Generalized advantage estimation over [T] or [T, E] arrays.

    Terminal steps bootstrap with 0; a non-terminal final step bootstraps
    with `bootstrap` (the value estimate of the next observation).
    Returns (advantages, returns) with returns = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    squeeze = rewards.ndim == 1
    if squeeze:
        rewards, values, dones = rewards[:, None], values[:, None], dones[:, None]
    T = rewards.shape[0]
    boot = np.broadcast_to(np.asarray(bootstrap, dtype=np.float64), rewards.shape[1:])
    adv = np.zeros_like(rewards)
    carry = np.zeros(rewards.shape[1:])
    for t in range(T - 1, -1, -1):
        nonterminal = ~dones[t]
        next_value = boot if t == T - 1 else values[t + 1]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        carry = delta + gamma * lam * nonterminal * carry
        adv[t] = carry
    returns = adv + values
    if squeeze:
        return adv[:, 0], returns[:, 0]
    return adv, returns


def huber_loss(err: np.ndarray, delta: float = HUBER_DELTA) -> np.ndarray:
    a = np.abs(err)
    return np.where(a <= delta, 0.5 * err * err, delta * (a - 0.5 * delta))


def ppo_update(learner: AgentLearner, X, actions, logp_old, advantages, returns,
               epochs: int = PPO_EPOCHS) -> dict:
    """Clipped-surrogate + entropy policy update and Huber value update.

    Runs `epochs` full-batch passes (one mini-batch). Raises on non-finite
    losses with diagnostics.
    """
    B = len(actions)
    rows = np.arange(B)
    p_old = np.exp(logp_old)
    stats = {}
    for epoch in range(epochs):
        probs = learner.policy.forward(X)
        p_taken = probs[rows, actions]
        ratio = p_taken / p_old
        surr1 = ratio * advantages
        surr2 = np.clip(ratio, 1.0 - PPO_CLIP, 1.0 + PPO_CLIP) * advantages
        entropy = -np.sum(probs * np.log(probs), axis=1)
        policy_loss = -np.minimum(surr1, surr2).mean() - ENTROPY_COEF * entropy.mean()

        values = learner.values(X)
        verr = values - returns
        value_loss = huber_loss(verr).mean()
        if not (np.isfinite(policy_loss) and np.isfinite(value_loss)):
            raise RuntimeError(
                f"non-finite loss at epoch {epoch}: policy={policy_loss} value={value_loss} "
                f"ratio range [{ratio.min()}, {ratio.max()}], adv range "
                f"[{advantages.min()}, {advantages.max()}]")

        # d(-min(surr1, surr2))/d p_taken: the unclipped branch carries the
        # gradient whenever it is the active minimum, otherwise clip' = 0.
        active = surr1 <= surr2
        grad = ENTROPY_COEF * (np.log(probs) + 1.0) / B
        grad[rows, actions] += np.where(active, -advantages / p_old, 0.0) / B
        learner.policy_opt.step(learner.policy.backward(grad))

        # values() above already cached this epoch's value forward pass.
        dv = np.clip(verr, -HUBER_DELTA, HUBER_DELTA) / B
        learner.value_opt.step(learner.value.backward(dv[:, None]))
        stats = {"policy_loss": float(policy_loss), "value_loss": float(value_loss),
                 "entropy": float(entropy.mean())}
    return stats


def _posterior_channels(cfg: RunConfig, num_agents: int):
    pairwise = [(i, j) for i in range(num_agents) for j in range(num_agents) if i != j]
    single = list(range(num_agents))
    return pairwise, single


def make_posteriors(cfg: RunConfig, num_agents: int, obs_dim: int, rng):
    """Posterior stores for the configured mode; None when the mode needs none.

    The pairwise store conditions agent i's action on agent j's z-bin; the
    scalable store conditions on the bin of the summed accumulated novelty
    of all other agents (bin range widened by N - 1).
    """
    mode = RewardMode(cfg.mode)
    pairwise, single = _posterior_channels(cfg, num_agents)
    stores = {"pairwise": None, "scalable": None}
    if mode in HINDSIGHT_MODES:
        if cfg.posterior == "mlp":
            stores["pairwise"] = MlpPosterior(pairwise, NUM_ACTIONS, cfg.w, obs_dim, rng,
                                              z_scale=(1.0 - cfg.gamma))
        else:
            stores["pairwise"] = CountPosterior(pairwise, NUM_ACTIONS, cfg.w)
    if mode in SCALABLE_MODES:
        if cfg.posterior == "mlp":
            stores["scalable"] = MlpPosterior(single, NUM_ACTIONS, cfg.w, obs_dim, rng,
                                              z_scale=(1.0 - cfg.gamma) / max(num_agents - 1, 1))
        else:
            stores["scalable"] = CountPosterior(single, NUM_ACTIONS, cfg.w)
    return stores


def finish_rewards(data: RolloutData, cfg: RunConfig, stores) -> tuple:
    """Hindsight pass over a collected window.

    Relabels each agent's novelties by batch percentiles, accumulates them
    within episodes, inserts the window into the posterior stores, and
    assembles per-step shaped rewards. Returns (shaped, nov_part, hin_part),
    each [N, T, E].
    """
    mode = RewardMode(cfg.mode)
    num_agents, T, E = data.u.shape
    reward_cfg = cfg.reward

    ztilde = np.zeros_like(data.u)
    for j in range(num_agents):
        _, labels = relabel(data.u[j])
        for e in range(E):
            ztilde[j, :, e] = accumulate_episodes(labels[:, e], data.done[:, e], cfg.gamma)
    if cfg.hindsight_weight == "raw":
        weight_z = np.zeros_like(data.u)
        for j in range(num_agents):
            for e in range(E):
                weight_z[j, :, e] = accumulate_episodes(data.u[j, :, e], data.done[:, e], cfg.gamma)
    else:
        weight_z = ztilde

    log_ratios = None
    if mode in HINDSIGHT_MODES and stores["pairwise"] is not None:
        store = stores["pairwise"]
        zbin = discretize_z(ztilde, cfg.K, cfg.gamma)
        if isinstance(store, CountPosterior):
            batch = {}
            for i in range(num_agents):
                for j in range(num_agents):
                    if i == j:
                        continue
                    batch[(i, j)] = [
                        (data.obs_keys[i][t][e], data.actions[i, t, e], zbin[j, t, e])
                        for t in range(T) for e in range(E)
                    ]
            store.insert_batch(batch)
            log_ratios = np.zeros((num_agents, T, E, num_agents - 1))
            for i in range(num_agents):
                others = [j for j in range(num_agents) if j != i]
                for k, j in enumerate(others):
                    for t in range(T):
                        for e in range(E):
                            p = store.query((i, j), data.obs_keys[i][t][e], zbin[j, t, e])
                            p_a = p[data.actions[i, t, e]]
                            log_ratios[i, t, e, k] = (
                                np.log(max(p_a, POSTERIOR_FLOOR)) - data.logp_old[i, t, e])
        else:
            batch = {}
            for i in range(num_agents):
                for j in range(num_agents):
                    if i == j:
                        continue
                    batch[(i, j)] = (data.X[i].reshape(T * E, -1),
                                     data.actions[i].reshape(T * E),
                                     ztilde[j].reshape(T * E))
            store.insert_batch(batch)
            log_ratios = np.zeros((num_agents, T, E, num_agents - 1))
            for i in range(num_agents):
                others = [j for j in range(num_agents) if j != i]
                for k, j in enumerate(others):
                    probs = store.query_batch((i, j), data.X[i].reshape(T * E, -1),
                                              ztilde[j].reshape(T * E))
                    p_a = probs[np.arange(T * E), data.actions[i].reshape(T * E)]
                    log_ratios[i, :, :, k] = (
                        np.log(np.maximum(p_a, POSTERIOR_FLOOR)).reshape(T, E)
                        - data.logp_old[i])

    z_sum = None
    log_ratio_sum = None
    if mode in SCALABLE_MODES and stores["scalable"] is not None:
        store = stores["scalable"]
        scale = max(num_agents - 1, 1)
        z_sum = np.zeros((num_agents, T, E))
        for i in range(num_agents):
            z_sum[i] = sum(ztilde[j] for j in range(num_agents) if j != i)
        zbin_sum = discretize_z(z_sum, cfg.K, cfg.gamma, scale=scale)
        if isinstance(store, CountPosterior):
            batch = {
                i: [(data.obs_keys[i][t][e], data.actions[i, t, e], zbin_sum[i, t, e])
                    for t in range(T) for e in range(E)]
                for i in range(num_agents)
            }
            store.insert_batch(batch)
            log_ratio_sum = np.zeros((num_agents, T, E))
            for i in range(num_agents):
                for t in range(T):
                    for e in range(E):
                        p = store.query(i, data.obs_keys[i][t][e], zbin_sum[i, t, e])
                        p_a = p[data.actions[i, t, e]]
                        log_ratio_sum[i, t, e] = (
                            np.log(max(p_a, POSTERIOR_FLOOR)) - data.logp_old[i, t, e])
        else:
            batch = {
                i: (data.X[i].reshape(T * E, -1), data.actions[i].reshape(T * E),
                    z_sum[i].reshape(T * E))
                for i in range(num_agents)
            }
            store.insert_batch(batch)
            log_ratio_sum = np.zeros((num_agents, T, E))
            for i in range(num_agents):
                probs = store.query_batch(i, data.X[i].reshape(T * E, -1),
                                          z_sum[i].reshape(T * E))
                p_a = probs[np.arange(T * E), data.actions[i].reshape(T * E)]
                log_ratio_sum[i] = (np.log(np.maximum(p_a, POSTERIOR_FLOOR)).reshape(T, E)
                                    - data.logp_old[i])

    u_all = np.moveaxis(data.u, 0, -1)  # [T, E, N]
    shaped = np.zeros((num_agents, T, E))
    nov_part = np.zeros((num_agents, T, E))
    hin_part = np.zeros((num_agents, T, E))
    for i in range(num_agents):
        others = [j for j in range(num_agents) if j != i]
        kwargs = {}
        if mode in (RewardMode.HIN, RewardMode.MACE, RewardMode.MACE_Z):
            kwargs["z_others"] = np.stack([weight_z[j] for j in others], axis=-1)
        if mode in HINDSIGHT_MODES:
            kwargs["log_ratios_others"] = log_ratios[i]
        if mode in SCALABLE_MODES:
            sum_weight = (z_sum[i] if cfg.hindsight_weight != "raw"
                          else sum(weight_z[j] for j in others))
            kwargs["z_sum_others"] = sum_weight
            kwargs["log_ratio_sum"] = log_ratio_sum[i]
        nov, hin = shaped_reward_parts(reward_cfg, u_all, agent=i, **kwargs)
        nov_part[i] = nov
        hin_part[i] = hin
        shaped[i] = data.r_ext + nov + hin
    return shaped, nov_part, hin_part


@dataclass
class TrainResult:
    curve: list               # per-iteration metric dicts
    learners: list
    spec: object
    bus_messages: int
    env_steps: int
    eval_return: float
    eval_success: bool
    eval_bus_messages: int


def train(cfg: RunConfig, seed: int, decomp_writer=None, bus_trace_path=None,
          progress=None) -> TrainResult:
    """Full training run for one seed; returns the learning curve and audit
    counters. `decomp_writer`, when given, receives per-step reward
    decomposition rows (iteration, t, env, agent, x, y, r_ext, r_nov, r_hin)
    for iterations in [decomp_from, decomp_to)."""
    spec = make_task(cfg.task, grid_size=cfg.grid_size, max_steps=cfg.max_steps)
    num_agents = spec.num_agents
    net_rngs, action_rngs, aux_rng = seed_streams(seed, num_agents, cfg.num_envs)
    feat_dim = obs_feature_dim(spec.grid_size, spec.obs_dim)
    learners = [AgentLearner(feat_dim, rng=net_rngs[i]) for i in range(num_agents)]
    envs = [GridEnv(spec) for _ in range(cfg.num_envs)]
    novelty = make_novelty_backend(cfg, num_agents, feat_dim, aux_rng)
    stores = make_posteriors(cfg, num_agents, feat_dim, aux_rng)
    bus = NoveltyBus(num_agents, trace_path=bus_trace_path)

    decomp_to = cfg.decomp_to if cfg.decomp_to is not None else cfg.iterations
    curve = []
    env_steps = 0
    try:
        for it in range(cfg.iterations):
            data = collect_rollout(envs, learners, novelty, bus, cfg.buffer_length, action_rngs)
            env_steps += data.steps
            shaped, nov_part, hin_part = finish_rewards(data, cfg, stores)

            if decomp_writer is not None and cfg.decomp_from <= it < decomp_to:
                _write_decomposition(decomp_writer, it, data, nov_part, hin_part)

            for i in range(num_agents):
                adv, returns = gae(shaped[i], data.values_old[i], data.done,
                                   cfg.gamma, GAE_LAMBDA, bootstrap=data.bootstrap[i])
                adv = adv.reshape(-1)
                if cfg.normalize_advantages:
                    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
                ppo_update(learners[i],
                           data.X[i].reshape(data.steps, -1),
                           data.actions[i].reshape(-1),
                           data.logp_old[i].reshape(-1),
                           adv,
                           returns.reshape(-1))
            novelty.end_iteration()

            finished = data.episodes
            mean_ep = float(np.mean([r for r, _, _ in finished])) if finished else 0.0
            success = float(np.mean([s for _, s, _ in finished])) if finished else 0.0
            row = {
                "iteration": it,
                "env_steps": env_steps,
                "mean_episode_reward": mean_ep,
                "mean_r_nov": float(nov_part.mean()),
                "mean_r_hin": float(hin_part.mean()),
                "success_rate": success,
            }
            curve.append(row)
            if progress is not None:
                progress(row)
    finally:
        bus.close()

    messages_before_eval = bus.messages_sent
    eval_return, eval_success, _ = evaluate_rollout(spec, learners)
    eval_messages = bus.messages_sent - messages_before_eval

    return TrainResult(curve=curve, learners=learners, spec=spec,
                       bus_messages=messages_before_eval, env_steps=env_steps,
                       eval_return=eval_return, eval_success=bool(eval_success),
                       eval_bus_messages=eval_messages)


def _write_decomposition(writer, iteration: int, data: RolloutData, nov_part, hin_part) -> None:
    num_agents, T, E = nov_part.shape
    for t in range(T):
        for e in range(E):
            for i in range(num_agents):
                x, y = data.obs_keys[i][t][e][:2]
                writer.writerow([iteration, t, e, i, x, y,
                                 repr(float(data.r_ext[t, e])),
                                 repr(float(nov_part[i, t, e])),
                                 repr(float(hin_part[i, t, e]))])
