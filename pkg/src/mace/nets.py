"""Minimal feed-forward function approximators with exact reverse-mode gradients.

Everything runs in float64 numpy. Networks are small MLPs with ReLU hidden
layers and a linear or softmax head; gradients come from hand-written
backprop (verified against central finite differences in the test suite)
and are applied with an adaptive-moment optimizer that clips the global
gradient norm before updating.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

HIDDEN_GAIN = float(np.sqrt(2.0))
SOFTMAX_HEAD_GAIN = 0.01
LINEAR_HEAD_GAIN = 1.0

_MAGIC = b"MACENET1"
_HEAD_CODES = {"linear": 0, "softmax": 1}
_HEAD_NAMES = {v: k for k, v in _HEAD_CODES.items()}


def orthogonal_init(rng: np.random.Generator, n_in: int, n_out: int, gain: float) -> np.ndarray:
    """Orthogonal weight matrix of shape (n_in, n_out), scaled by gain."""
    a = rng.standard_normal((max(n_in, n_out), min(n_in, n_out)))
    q, r = np.linalg.qr(a)
    # Sign-fix the factorization so the init is a deterministic function of rng.
    q = q * np.sign(np.diag(r))
    if n_in < n_out:
        q = q.T
    return gain * q[:n_in, :n_out]


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class Mlp:
    """Fully connected net: ReLU hidden layers, `linear` or `softmax` head.

    Weights are stored as (n_in, n_out) float64 arrays; `forward` accepts a
    single vector or a batch and caches activations for `backward`, which
    returns per-layer (dW, db) gradients summed over the batch.
    """

    def __init__(self, sizes, head="linear", rng=None, head_gain=None):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if head not in _HEAD_CODES:
            raise ValueError(f"unknown head {head!r}")
        if rng is None:
            rng = np.random.default_rng()
        if head_gain is None:
            head_gain = SOFTMAX_HEAD_GAIN if head == "softmax" else LINEAR_HEAD_GAIN
        self.sizes = tuple(int(s) for s in sizes)
        self.head = head
        self.head_gain = float(head_gain)
        self.weights = []
        self.biases = []
        for li in range(len(self.sizes) - 1):
            gain = head_gain if li == len(self.sizes) - 2 else HIDDEN_GAIN
            self.weights.append(orthogonal_init(rng, self.sizes[li], self.sizes[li + 1], gain))
            self.biases.append(np.zeros(self.sizes[li + 1]))
        self._cache = None

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        X = x[None, :] if single else x
        if X.ndim != 2 or X.shape[1] != self.sizes[0]:
            raise ValueError(f"expected input width {self.sizes[0]}, got shape {x.shape}")
        acts = [X]
        pres = []
        h = X
        last = len(self.weights) - 1
        for li, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ W + b
            pres.append(z)
            h = z if li == last else np.maximum(z, 0.0)
            acts.append(h)
        out = softmax(h) if self.head == "softmax" else h
        self._cache = (acts, pres, out)
        return out[0] if single else out

    def backward(self, grad_out) -> list:
        """Gradients of a scalar loss given dLoss/dOutput for the last forward.

        For a softmax head `grad_out` is the gradient w.r.t. the output
        probabilities; the softmax Jacobian is applied internally. Returns
        [(dW, db), ...] in layer order, summed over the batch.
        """
        if self._cache is None:
            raise RuntimeError("backward called without a cached forward pass")
        acts, pres, out = self._cache
        g = np.asarray(grad_out, dtype=np.float64)
        if g.ndim == 1:
            g = g[None, :]
        if g.shape != out.shape:
            raise ValueError(f"grad_out shape {g.shape} does not match output {out.shape}")
        if self.head == "softmax":
            # dL/dz_k = p_k * (g_k - sum_j g_j p_j)
            g = out * (g - (g * out).sum(axis=1, keepdims=True))
        grads = [None] * len(self.weights)
        for li in range(len(self.weights) - 1, -1, -1):
            dW = acts[li].T @ g
            db = g.sum(axis=0)
            grads[li] = (dW, db)
            if li > 0:
                g = (g @ self.weights[li].T) * (pres[li - 1] > 0.0)
        return grads

    def copy(self) -> "Mlp":
        dup = Mlp.__new__(Mlp)
        dup.sizes = self.sizes
        dup.head = self.head
        dup.head_gain = self.head_gain
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        dup._cache = None
        return dup

    def get_flat(self) -> np.ndarray:
        parts = []
        for W, b in zip(self.weights, self.biases):
            parts.append(W.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.n_params:
            raise ValueError(f"expected {self.n_params} params, got {flat.size}")
        pos = 0
        for li, (W, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[li] = flat[pos:pos + W.size].reshape(W.shape).copy()
            pos += W.size
            self.biases[li] = flat[pos:pos + b.size].copy()
            pos += b.size

    def fingerprint(self) -> str:
        """Stable hash of the current parameters."""
        h = hashlib.sha256()
        for W, b in zip(self.weights, self.biases):
            h.update(np.ascontiguousarray(W).tobytes())
            h.update(np.ascontiguousarray(b).tobytes())
        return h.hexdigest()

    def save(self, path) -> None:
        """Checkpoint layout: magic, head code u8, layer count u32, sizes u32[],
        head gain f64, then row-major float64 W1, b1, W2, b2, ..."""
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<BI", _HEAD_CODES[self.head], len(self.sizes)))
            fh.write(struct.pack(f"<{len(self.sizes)}I", *self.sizes))
            fh.write(struct.pack("<d", self.head_gain))
            for W, b in zip(self.weights, self.biases):
                fh.write(np.ascontiguousarray(W).tobytes())
                fh.write(np.ascontiguousarray(b).tobytes())

    @classmethod
    def load(cls, path) -> "Mlp":
        with open(path, "rb") as fh:
            if fh.read(len(_MAGIC)) != _MAGIC:
                raise ValueError(f"{path}: not a network checkpoint")
            head_code, n_sizes = struct.unpack("<BI", fh.read(5))
            sizes = struct.unpack(f"<{n_sizes}I", fh.read(4 * n_sizes))
            (head_gain,) = struct.unpack("<d", fh.read(8))
            net = cls.__new__(cls)
            net.sizes = sizes
            net.head = _HEAD_NAMES[head_code]
            net.head_gain = head_gain
            net.weights = []
            net.biases = []
            for li in range(n_sizes - 1):
                n_in, n_out = sizes[li], sizes[li + 1]
                W = np.frombuffer(fh.read(8 * n_in * n_out), dtype=np.float64).reshape(n_in, n_out).copy()
                b = np.frombuffer(fh.read(8 * n_out), dtype=np.float64).copy()
                net.weights.append(W)
                net.biases.append(b)
            net._cache = None
            return net


def global_norm(grads) -> float:
    total = 0.0
    for dW, db in grads:
        total += float(np.sum(dW * dW)) + float(np.sum(db * db))
    return float(np.sqrt(total))


def clip_grads(grads, max_norm: float):
    """Scale the whole gradient set so its global norm is at most max_norm."""
    norm = global_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return grads, norm
    scale = max_norm / norm
    return [(dW * scale, db * scale) for dW, db in grads], norm


class Adam:
    """Adaptive-moment optimizer bound to one network.

    Applies global gradient-norm clipping (default 10.0) before the
    bias-corrected moment update; epsilon defaults to 1e-5.
    """

    def __init__(self, net: Mlp, lr: float, beta1=0.9, beta2=0.999, eps=1e-5, clip_norm=10.0):
        self.net = net
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.clip_norm = clip_norm
        self.t = 0
        self.m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
        self.v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]

    def step(self, grads) -> None:
        if len(grads) != len(self.net.weights):
            raise ValueError("gradient list does not match network layers")
        if self.clip_norm is not None:
            grads, _ = clip_grads(grads, self.clip_norm)
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for li, (dW, db) in enumerate(grads):
            mW, mb = self.m[li]
            vW, vb = self.v[li]
            mW *= self.beta1
            mW += (1.0 - self.beta1) * dW
            mb *= self.beta1
            mb += (1.0 - self.beta1) * db
            vW *= self.beta2
            vW += (1.0 - self.beta2) * dW * dW
            vb *= self.beta2
            vb += (1.0 - self.beta2) * db * db
            self.net.weights[li] -= self.lr * (mW / c1) / (np.sqrt(vW / c2) + self.eps)
            self.net.biases[li] -= self.lr * (mb / c1) / (np.sqrt(vb / c2) + self.eps)


def finite_difference_grads(net: Mlp, x: np.ndarray, loss_weights: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of L = sum(loss_weights * net(x)) over all params.

    Independent oracle for `Mlp.backward`; deliberately does not share any
    code with the reverse-mode path.
    """
    flat = net.get_flat()
    out = np.zeros_like(flat)
    for k in range(flat.size):
        bumped = flat.copy()
        bumped[k] += h
        net.set_flat(bumped)
        up = float(np.sum(loss_weights * net.forward(x)))
        bumped[k] -= 2.0 * h
        net.set_flat(bumped)
        down = float(np.sum(loss_weights * net.forward(x)))
        out[k] = (up - down) / (2.0 * h)
    net.set_flat(flat)
    return out
