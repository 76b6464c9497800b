"""Acceptance suite: one test per acceptance criterion, each printing a
PASS/FAIL line. The desk-scale learning experiment (criteria 7-10) trains
Pass at 15x15 for four reward modes x 5 seeds and is by far the slowest
part; its runs are shared across those criteria via a session fixture.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""

import csv
import json
import time

import numpy as np
import pytest

from mace.config import RunConfig
from mace.gridworld import make_task
from mace.harness import curve_path, heatmap, read_curve, run, summary_path
from mace.infotheory import (
    DiscreteJoint,
    HIGH_VALUE_STATE,
    LOW_VALUE_STATE,
    demo_joint,
    mutual_information,
    pointwise_mutual_information,
    weighted_mutual_information,
)
from mace.ippo import train
from mace.nets import Mlp, finite_difference_grads
from mace.rewards import CountPosterior, accumulate, discretize_z, relabel


def report(number: int, passed: bool, detail: str) -> None:
    print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")


def checked(number: int, condition: bool, detail: str) -> None:
    report(number, condition, detail)
    assert condition, f"criterion {number}: {detail}"


# -- Criteria 1-6: analytical reproductions and module properties ------------


def test_criterion_1_identical_mi_dominant_wmi():
    t0 = time.time()
    grid = np.round(np.arange(0.05, 0.951, 0.05), 10)
    worst_gap = 0.0
    dominance = True
    for p in grid:
        low = demo_joint(LOW_VALUE_STATE, p)
        high = demo_joint(HIGH_VALUE_STATE, p)
        worst_gap = max(worst_gap, abs(mutual_information(low) - mutual_information(high)))
        dominance &= weighted_mutual_information(high) > weighted_mutual_information(low)
    elapsed = time.time() - t0
    checked(1, worst_gap < 1e-12 and dominance and elapsed < 1.0,
            f"MI gap {worst_gap:.2e} (<1e-12), WMI dominance {dominance}, {elapsed:.2f}s")


def test_criterion_2_monte_carlo_wmi_consistency():
    t0 = time.time()
    rng = np.random.default_rng(20240)
    draws = 100_000
    failures = []
    for trial in range(10):
        p = rng.random((4, 8)) + 0.05
        p /= p.sum()
        outcomes = tuple(rng.random(8) * 2.5 + 0.2)
        joint = DiscreteJoint(tuple(range(4)), outcomes, p)
        exact = weighted_mutual_information(joint)
        pmi = np.array([[pointwise_mutual_information(joint, a, z)
                         for z in range(8)] for a in range(4)])
        flat = rng.choice(32, size=draws, p=joint.p.ravel())
        ai, zi = np.unravel_index(flat, (4, 8))
        estimate = float(np.mean(np.asarray(outcomes)[zi] * pmi[ai, zi]))
        err = abs(estimate - exact)
        ok = err <= 0.005 if exact < 0.25 else err / abs(exact) <= 0.02
        if not ok:
            failures.append((trial, exact, estimate))
    elapsed = time.time() - t0
    checked(2, not failures and elapsed < 10.0,
            f"10 joints x {draws} draws within tolerance, {elapsed:.2f}s"
            + (f"; failures {failures}" if failures else ""))


def test_criterion_3_gradient_correctness():
    t0 = time.time()
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(20):
        net = Mlp([8, 16, 4], head="softmax" if k % 2 == 0 else "linear", rng=rng)
        x = rng.standard_normal(8)
        c = rng.standard_normal(4)
        net.forward(x)
        grads = net.backward(c)
        analytic = np.concatenate([np.concatenate([dW.ravel(), db.ravel()])
                                   for dW, db in grads])
        numeric = finite_difference_grads(net, x, c)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
        worst = max(worst, float(np.max(np.abs(analytic - numeric) / denom)))
    elapsed = time.time() - t0
    checked(3, worst < 1e-4 and elapsed < 30.0,
            f"max relative gradient error {worst:.2e} over 20 nets, {elapsed:.1f}s")


def test_criterion_4_reward_mode_degeneracies():
    t0 = time.time()
    base = dict(task="pass", grid_size=15, max_steps=60, num_envs=4,
                buffer_length=60, iterations=3, seeds=(0,))
    mace0 = train(RunConfig(mode="mace", lam=0.0, **base), seed=11)
    nov = train(RunConfig(mode="nov_sum", **base), seed=11)
    hin0 = train(RunConfig(mode="hin", lam=0.0, **base), seed=11)
    loc = train(RunConfig(mode="loc", **base), seed=11)
    elapsed = time.time() - t0
    same_a = mace0.curve == nov.curve
    same_b = hin0.curve == loc.curve
    checked(4, same_a and same_b and elapsed < 120.0,
            f"mace(lam=0) == nov_sum: {same_a}; hin(lam=0) == loc: {same_b}; "
            f"bit-identical over 3 iterations, {elapsed:.1f}s")


def test_criterion_5_posterior_store_properties():
    t0 = time.time()
    rng = np.random.default_rng(99)
    w = 10
    channels = [(0, 1), (1, 0)]
    store = CountPosterior(channels, 4, window=w)
    history = []
    # 1000 random insertions spread over 20 batches.
    for _ in range(20):
        batch = {ch: [((int(rng.integers(6)), int(rng.integers(6))),
                       int(rng.integers(4)), int(rng.integers(10)))
                      for _ in range(25)] for ch in channels}
        store.insert_batch(batch)
        history.append(batch)

    # Brute-force recount over the raw window (exact).
    recount_ok = True
    for ch in channels:
        seen = {}
        for batch in history[-w:]:
            for obs, a, zb in batch[ch]:
                seen.setdefault((obs, zb), np.zeros(4, dtype=np.int64))[a] += 1
        keys = {(obs, zb) for batch in history for obs, a, zb in batch[ch]}
        for obs, zb in keys:
            expect = seen.get((obs, zb), np.zeros(4, dtype=np.int64))
            recount_ok &= bool(np.array_equal(store.counts(ch, obs, zb), expect))

    # Normalization wherever counts exist.
    norm_ok = True
    for ch in channels:
        for key, row in store._agg[ch].items():
            norm_ok &= abs(float(store.query(ch, key[0], key[1]).sum()) - 1.0) < 1e-12

    # Window eviction equivalence.
    tail = CountPosterior(channels, 4, window=w)
    for batch in history[1:w + 1]:
        tail.insert_batch(batch)
    full = CountPosterior(channels, 4, window=w)
    for batch in history[:w + 1]:
        full.insert_batch(batch)
    evict_ok = True
    for ch in channels:
        keys = {(obs, zb) for batch in history[:w + 1] for obs, a, zb in batch[ch]}
        for obs, zb in keys:
            evict_ok &= bool(np.array_equal(full.counts(ch, obs, zb),
                                            tail.counts(ch, obs, zb)))
    elapsed = time.time() - t0
    checked(5, recount_ok and norm_ok and evict_ok and elapsed < 10.0,
            f"recount {recount_ok}, normalization {norm_ok}, eviction {evict_ok}, {elapsed:.1f}s")


def test_criterion_6_relabel_discretize_properties():
    t0 = time.time()
    rng = np.random.default_rng(3)
    scale_ok = True
    for _ in range(200):
        batch = rng.random(rng.integers(2, 200)) * 10 + 0.01
        _, labels = relabel(batch)
        for c in (0.5, 3.0, 17.5):
            _, scaled = relabel(c * batch)
            scale_ok &= bool(np.array_equal(labels, scaled))

    gamma = 0.99
    _, labels = relabel(rng.random(2000))
    z = accumulate(labels, gamma)
    range_ok = bool(np.all(z > 0.0) and np.all(z <= 0.9 / (1 - gamma) + 1e-12))
    k1_ok = all(int(discretize_z(float(v), 1, gamma)) == 0 for v in z[:100])
    elapsed = time.time() - t0
    checked(6, scale_ok and range_ok and k1_ok and elapsed < 5.0,
            f"scale invariance {scale_ok}, z range {range_ok}, K=1 degeneracy {k1_ok}, {elapsed:.1f}s")


# -- Criteria 7-10: the desk-scale learning experiment ------------------------

DESK_SEEDS = (0, 1, 2, 3, 4)
DESK_MODES = ("mace", "nov_sum", "nov_max", "loc")
DESK_ITERATIONS = 300


@pytest.fixture(scope="session")
def desk_runs(tmp_path_factory):
    """Pass at 15x15, 16 envs, 5 seeds, 300 iterations, four reward modes.

    MACE runs log the reward decomposition over the last third of training
    for the heatmap criterion. Runs are cached per pytest session.
    """
    root = tmp_path_factory.mktemp("desk")
    results = {}
    for mode in DESK_MODES:
        cfg = RunConfig(task="pass", grid_size=15, max_steps=300, mode=mode,
                        lam=0.01, gamma=0.99, w=10, K=30, num_envs=16,
                        buffer_length=300, iterations=DESK_ITERATIONS,
                        seeds=DESK_SEEDS, out_dir=str(root / mode),
                        log_decomposition=(mode == "mace"),
                        decomp_from=DESK_ITERATIONS * 2 // 3, jobs=2)
        results[mode] = run(cfg)
        assert not results[mode].failures, results[mode].failures
    return results


def final_rewards(result):
    out = {}
    for seed in DESK_SEEDS:
        curve = read_curve(curve_path(result.run_dir, seed))
        out[seed] = curve[-1]["mean_episode_reward"]
    return out


def test_criterion_7_desk_scale_ordering(desk_runs):
    mace = np.median(list(final_rewards(desk_runs["mace"]).values()))
    nov = np.median(list(final_rewards(desk_runs["nov_sum"]).values()))
    loc = np.median(list(final_rewards(desk_runs["loc"]).values()))
    ok = (mace >= nov) and (nov > loc) and (mace >= 50.0) and (loc < 10.0)
    checked(7, ok,
            f"median final mean-episode-reward: mace {mace:.1f} >= nov_sum {nov:.1f} "
            f"> loc {loc:.1f}; mace >= 50 and loc < 10")


def test_criterion_8_hindsight_heatmap_peaks_near_switch_1(desk_runs):
    result = desk_runs["mace"]
    spec = make_task("pass", grid_size=15)
    sw1 = spec.layout.switches[0]
    hits = 0
    details = []
    for seed in DESK_SEEDS:
        cells = heatmap(result.run_dir, seed=seed, agent=0, component="hin",
                        iter_from=DESK_ITERATIONS * 2 // 3)
        if not cells:
            continue
        peak = max(cells, key=cells.get)
        dist = max(abs(peak[0] - sw1[0]), abs(peak[1] - sw1[1]))
        details.append(f"seed {seed}: peak {peak} dist {dist}")
        if dist <= 2:
            hits += 1
    checked(8, hits >= 3,
            f"agent 1 hindsight peak within Chebyshev 2 of switch 1 {sw1} on "
            f"{hits}/5 seeds ({'; '.join(details)})")


def test_criterion_9_sum_beats_max(desk_runs):
    nov_sum = np.median(list(final_rewards(desk_runs["nov_sum"]).values()))
    nov_max = np.median(list(final_rewards(desk_runs["nov_max"]).values()))
    # Report-only when within noise: pass unless max significantly exceeds sum.
    sums = np.array(list(final_rewards(desk_runs["nov_sum"]).values()))
    maxes = np.array(list(final_rewards(desk_runs["nov_max"]).values()))
    spread = np.std(np.concatenate([sums, maxes])) + 1e-9
    within_noise = abs(nov_sum - nov_max) <= spread
    ok = (nov_sum >= nov_max) or within_noise
    checked(9, ok,
            f"median final reward nov_sum {nov_sum:.1f} vs nov_max {nov_max:.1f}"
            + ("; within noise (report-only)" if within_noise and nov_sum < nov_max else ""))


def test_criterion_10_communication_budget(desk_runs):
    ok = True
    details = []
    for mode, result in desk_runs.items():
        for seed in DESK_SEEDS:
            with open(summary_path(result.run_dir, seed)) as fh:
                summary = json.load(fh)
            expect = summary["num_agents"] * summary["env_steps"]
            ok &= summary["bus_messages"] == expect
            ok &= summary["eval_bus_messages"] == 0
        details.append(f"{mode}: N*steps == {expect}")
    checked(10, ok, "bus counter equals N x total env steps on every run; "
                    "evaluation rollouts sent 0 messages")
