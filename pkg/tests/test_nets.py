"""Tests for the minimal MLP: forward semantics, exact gradients, optimizer."""

import numpy as np
import pytest

from mace.nets import Adam, Mlp, clip_grads, finite_difference_grads, global_norm


def flat_grads(grads):
    parts = []
    for dW, db in grads:
        parts.append(dW.ravel())
        parts.append(db.ravel())
    return np.concatenate(parts)


class TestForward:
    def test_zero_weights_softmax_uniform(self):
        net = Mlp([3, 4], head="softmax", rng=np.random.default_rng(0))
        for W in net.weights:
            W[:] = 0.0
        out = net.forward(np.array([0.3, -1.0, 2.0]))
        assert np.allclose(out, 0.25)

    def test_softmax_sums_to_one(self):
        net = Mlp([5, 8, 3], head="softmax", rng=np.random.default_rng(1))
        X = np.random.default_rng(2).standard_normal((7, 5))
        out = net.forward(X)
        assert np.all(np.abs(out.sum(axis=1) - 1.0) < 1e-9)
        assert np.all(out > 0)

    def test_deterministic(self):
        net = Mlp([4, 6, 2], rng=np.random.default_rng(3))
        x = np.array([1.0, 2.0, -0.5, 0.0])
        assert np.array_equal(net.forward(x), net.forward(x))

    def test_size_mismatch_raises(self):
        net = Mlp([4, 2], rng=np.random.default_rng(4))
        with pytest.raises(ValueError):
            net.forward(np.zeros(5))

    def test_same_seed_same_init(self):
        a = Mlp([3, 5, 2], head="softmax", rng=np.random.default_rng(9))
        b = Mlp([3, 5, 2], head="softmax", rng=np.random.default_rng(9))
        assert a.fingerprint() == b.fingerprint()


class TestBackward:
    def test_linear_single_layer_closed_form(self):
        # L = (w . x - y)^2  =>  dL/dw = 2 (w . x - y) x
        net = Mlp([3, 1], head="linear", rng=np.random.default_rng(5))
        x = np.array([0.5, -1.0, 2.0])
        y = 0.7
        pred = float(net.forward(x)[0])
        grads = net.backward(np.array([2.0 * (pred - y)]))
        dW, db = grads[0]
        expect = 2.0 * (pred - y) * x
        assert np.allclose(dW[:, 0], expect, atol=1e-12)
        assert np.allclose(db, 2.0 * (pred - y), atol=1e-12)

    def test_constant_loss_zero_gradient(self):
        net = Mlp([4, 6, 3], rng=np.random.default_rng(6))
        net.forward(np.ones(4))
        grads = net.backward(np.zeros(3))
        assert np.all(flat_grads(grads) == 0.0)

    def test_backward_without_forward_raises(self):
        net = Mlp([2, 2], rng=np.random.default_rng(7))
        with pytest.raises(RuntimeError):
            net.backward(np.zeros(2))

    @pytest.mark.parametrize("head", ["linear", "softmax"])
    def test_matches_finite_differences(self, head):
        rng = np.random.default_rng(8)
        net = Mlp([8, 16, 4], head=head, rng=rng)
        x = rng.standard_normal(8)
        c = rng.standard_normal(4)
        net.forward(x)
        analytic = flat_grads(net.backward(c))
        numeric = finite_difference_grads(net, x, c)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
        assert np.max(np.abs(analytic - numeric) / denom) < 1e-4

    def test_batch_gradient_is_sum_over_samples(self):
        rng = np.random.default_rng(10)
        net = Mlp([3, 5, 2], rng=rng)
        X = rng.standard_normal((4, 3))
        G = rng.standard_normal((4, 2))
        net.forward(X)
        batched = flat_grads(net.backward(G))
        single = np.zeros_like(batched)
        for i in range(4):
            net.forward(X[i])
            single += flat_grads(net.backward(G[i]))
        assert np.allclose(batched, single, atol=1e-12)


class TestOptimizer:
    def test_zero_gradient_leaves_params_unchanged(self):
        net = Mlp([3, 4, 2], rng=np.random.default_rng(11))
        before = net.get_flat().copy()
        opt = Adam(net, lr=1e-3)
        zeros = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
        opt.step(zeros)
        assert np.array_equal(net.get_flat(), before)

    def test_step_count_increments(self):
        net = Mlp([2, 2], rng=np.random.default_rng(12))
        opt = Adam(net, lr=1e-3)
        grads = [(np.ones_like(w), np.ones_like(b)) for w, b in zip(net.weights, net.biases)]
        opt.step(grads)
        assert opt.t == 1
        opt.step(grads)
        assert opt.t == 2

    def test_large_gradient_clipped_to_norm_10(self):
        net_a = Mlp([3, 2], rng=np.random.default_rng(13))
        net_b = net_a.copy()
        grads = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net_a.weights, net_a.biases)]
        g = np.zeros_like(net_a.weights[0])
        g[0, 0] = 100.0
        grads[0] = (g, np.zeros_like(net_a.biases[0]))
        assert global_norm(grads) == pytest.approx(100.0)

        clipped, _ = clip_grads(grads, 10.0)
        assert global_norm(clipped) == pytest.approx(10.0)

        # Updating with the raw (to-be-clipped) grads must equal updating with
        # pre-clipped grads and clipping disabled.
        Adam(net_a, lr=1e-3, clip_norm=10.0).step(grads)
        Adam(net_b, lr=1e-3, clip_norm=None).step(clipped)
        assert np.array_equal(net_a.get_flat(), net_b.get_flat())

    def test_training_determinism_bit_identical(self):
        def run():
            rng = np.random.default_rng(14)
            net = Mlp([4, 8, 2], rng=rng)
            opt = Adam(net, lr=7e-4)
            X = np.random.default_rng(15).standard_normal((16, 4))
            for _ in range(25):
                out = net.forward(X)
                grads = net.backward(2.0 * (out - 1.0) / len(X))
                opt.step(grads)
            return net.get_flat()

        assert np.array_equal(run(), run())


class TestGradientProperty:
    def test_finite_differences_over_20_random_nets(self):
        rng = np.random.default_rng(16)
        worst = 0.0
        for k in range(20):
            head = "softmax" if k % 2 == 0 else "linear"
            net = Mlp([8, 16, 4], head=head, rng=rng)
            x = rng.standard_normal(8)
            c = rng.standard_normal(4)
            net.forward(x)
            analytic = flat_grads(net.backward(c))
            numeric = finite_difference_grads(net, x, c)
            denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
            worst = max(worst, float(np.max(np.abs(analytic - numeric) / denom)))
        assert worst < 1e-4, f"max relative gradient error {worst}"


class TestCheckpoint:
    def test_save_load_round_trip(self, tmp_path):
        net = Mlp([5, 7, 3], head="softmax", rng=np.random.default_rng(17))
        path = tmp_path / "net.bin"
        net.save(path)
        loaded = Mlp.load(path)
        assert loaded.sizes == net.sizes
        assert loaded.head == net.head
        assert np.array_equal(loaded.get_flat(), net.get_flat())
        x = np.random.default_rng(18).standard_normal(5)
        assert np.array_equal(loaded.forward(x), net.forward(x))

    def test_load_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(ValueError):
            Mlp.load(path)
