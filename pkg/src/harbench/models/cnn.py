"""Minimal 1-D CNN in numpy with hand-written backpropagation.

conv(16, k=3, same) -> ReLU -> maxpool(2) -> conv(32, k=3, same) -> ReLU
-> global average pool -> dense -> softmax, trained with mini-batch SGD
with momentum on cross-entropy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..rng import derive_rng

log = logging.getLogger(__name__)

CONV1_FILTERS = 16
CONV2_FILTERS = 32
KERNEL = 3
BATCH_SIZE = 32
LEARNING_RATE = 0.01
MOMENTUM = 0.9


# --------------------------------------------------------------------------
# layers; each forward returns (output, cache)

def conv_forward(x, W, b):
    """Stride-1 'same' convolution. x: (N, Cin, L), W: (Cout, Cin, K)."""
    K = W.shape[2]
    pad = K // 2
    L = x.shape[2]
    xp = np.pad(x, ((0, 0), (0, 0), (pad, K - 1 - pad)))
    cols = np.stack([xp[:, :, k:k + L] for k in range(K)], axis=-1)     # (N, Cin, L, K)
    out = np.einsum("nclk,ock->nol", cols, W, optimize=True) + b[None, :, None]
    return out, (cols, W, pad, L)


def conv_backward(dout, cache):
    cols, W, pad, L = cache
    K = W.shape[2]
    dW = np.einsum("nol,nclk->ock", dout, cols, optimize=True)
    db = dout.sum(axis=(0, 2))
    dcols = np.einsum("nol,ock->nclk", dout, W, optimize=True)
    N, Cin = cols.shape[:2]
    dxp = np.zeros((N, Cin, L + K - 1))
    for k in range(K):
        dxp[:, :, k:k + L] += dcols[..., k]
    return dxp[:, :, pad:pad + L], dW, db


def relu_forward(x):
    return np.maximum(x, 0.0), x > 0


def relu_backward(dout, mask):
    return dout * mask


def maxpool_forward(x):
    """Non-overlapping width-2 max pool; an odd trailing sample forms its own pool."""
    N, C, L = x.shape
    L2 = (L + 1) // 2
    if L % 2:
        x = np.concatenate([x, np.full((N, C, 1), -np.inf)], axis=2)
    pairs = x.reshape(N, C, L2, 2)
    arg = np.argmax(pairs, axis=3)
    out = np.take_along_axis(pairs, arg[..., None], axis=3)[..., 0]
    return out, (arg, L)


def maxpool_backward(dout, cache):
    arg, L = cache
    N, C, L2 = dout.shape
    dpairs = np.zeros((N, C, L2, 2))
    np.put_along_axis(dpairs, arg[..., None], dout[..., None], axis=3)
    return dpairs.reshape(N, C, 2 * L2)[:, :, :L]


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


# --------------------------------------------------------------------------
# network

PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3")


def init_params(in_channels, n_classes, rng):
    def he(shape, fan_in):
        return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)

    return {
        "W1": he((CONV1_FILTERS, in_channels, KERNEL), in_channels * KERNEL),
        "b1": np.zeros(CONV1_FILTERS),
        "W2": he((CONV2_FILTERS, CONV1_FILTERS, KERNEL), CONV1_FILTERS * KERNEL),
        "b2": np.zeros(CONV2_FILTERS),
        "W3": rng.normal(0.0, np.sqrt(1.0 / CONV2_FILTERS), size=(CONV2_FILTERS, n_classes)),
        "b3": np.zeros(n_classes),
    }


def forward(params, x):
    """Logits and the caches needed by ``backward``."""
    h1, c1 = conv_forward(x, params["W1"], params["b1"])
    a1, r1 = relu_forward(h1)
    p1, m1 = maxpool_forward(a1)
    h2, c2 = conv_forward(p1, params["W2"], params["b2"])
    a2, r2 = relu_forward(h2)
    g = a2.mean(axis=2)
    logits = g @ params["W3"] + params["b3"]
    return logits, (c1, r1, m1, c2, r2, g, a2.shape[2])


def backward(params, dlogits, caches):
    c1, r1, m1, c2, r2, g, L2 = caches
    grads = {"W3": g.T @ dlogits, "b3": dlogits.sum(axis=0)}
    dg = dlogits @ params["W3"].T
    da2 = np.repeat(dg[:, :, None] / L2, L2, axis=2)
    dh2 = relu_backward(da2, r2)
    dp1, grads["W2"], grads["b2"] = conv_backward(dh2, c2)
    da1 = maxpool_backward(dp1, m1)
    dh1 = relu_backward(da1, r1)
    _, grads["W1"], grads["b1"] = conv_backward(dh1, c1)
    return grads


def predict_proba(params, x):
    logits, _ = forward(params, x)
    return softmax(logits)


def loss_and_grads(params, x, y):
    """Mean cross-entropy over the batch and its gradient for every parameter."""
    logits, caches = forward(params, x)
    p = softmax(logits)
    n = len(y)
    loss = -np.log(np.clip(p[np.arange(n), y], 1e-300, None)).mean()
    dlogits = p.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    return float(loss), backward(params, dlogits, caches)


def evaluate(params, x, y):
    p = predict_proba(params, x)
    loss = float(-np.log(np.clip(p[np.arange(len(y)), y], 1e-300, None)).mean())
    acc = float((p.argmax(axis=1) == y).mean())
    return loss, acc


class DivergenceError(RuntimeError):
    pass


@dataclass
class TrainResult:
    params: dict
    losses: list = field(default_factory=list)       # per epoch, full training set
    accuracies: list = field(default_factory=list)


def train(x, y, n_classes, epochs, seed, lr=LEARNING_RATE, momentum=MOMENTUM,
          batch_size=BATCH_SIZE) -> TrainResult:
    rng = derive_rng(seed, "cnn-init")
    params = init_params(x.shape[1], n_classes, rng)
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    order_rng = derive_rng(seed, "cnn-batches")
    result = TrainResult(params)
    for epoch in range(epochs):
        perm = order_rng.permutation(len(y))
        for a in range(0, len(y), batch_size):
            idx = perm[a:a + batch_size]
            loss, grads = loss_and_grads(params, x[idx], y[idx])
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch + 1}, batch {a // batch_size}")
            for k in PARAM_NAMES:
                velocity[k] = momentum * velocity[k] - lr * grads[k]
                params[k] += velocity[k]
        loss, acc = evaluate(params, x, y)
        if not np.isfinite(loss):
            raise DivergenceError(f"non-finite training loss after epoch {epoch + 1}")
        result.losses.append(loss)
        result.accuracies.append(acc)
    return result


def as_sequences(values, layout=None):
    """Rows -> (N, channels, length). Without a layout each row is a 1xF sequence."""
    values = np.asarray(values, dtype=float)
    if layout is None:
        return values[:, None, :]
    d, T = layout
    return values.reshape(len(values), d, T)
