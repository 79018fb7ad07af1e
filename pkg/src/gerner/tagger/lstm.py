"""Batched LSTM with padding masks, forward and backward passes in numpy.

Gates are stacked in the order input, forget, output, candidate.  At a
masked step the state is carried over unchanged, so padded positions at
the end of a sequence leave the final state equal to the state after the
last real input.
"""
from __future__ import annotations

import numpy as np


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def lstm_forward(X, mask, W, U, b):
    """Run over ``X`` of shape (T, B, D) with ``mask`` (T, B).

    Returns the hidden states (T, B, H) and a cache for ``lstm_backward``.
    """
    T, B, _ = X.shape
    H = U.shape[1]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    out = np.empty((T, B, H))
    steps = []
    for t in range(T):
        z = X[t] @ W.T + h @ U.T + b
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        o = sigmoid(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        m = mask[t][:, None]
        steps.append((h, c, i, f, o, g, tc, m))
        c = np.where(m, c_new, c)
        h = np.where(m, h_new, h)
        out[t] = h
    return out, (X, W, U, steps)


def lstm_backward(d_out, cache):
    """Backpropagate ``d_out`` (T, B, H); returns ``(dX, dW, dU, db)``."""
    X, W, U, steps = cache
    T, B, _ = X.shape
    H = U.shape[1]
    dX = np.empty_like(X)
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(W.shape[0])
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        h_prev, c_prev, i, f, o, g, tc, m = steps[t]
        dh = d_out[t] + dh_next
        dh_new = np.where(m, dh, 0.0)
        dc_new = np.where(m, dc_next, 0.0)
        do = dh_new * tc
        dc_new = dc_new + dh_new * o * (1.0 - tc * tc)
        dz = np.concatenate([dc_new * g * i * (1.0 - i),
                             dc_new * c_prev * f * (1.0 - f),
                             do * o * (1.0 - o),
                             dc_new * i * (1.0 - g * g)], axis=1)
        dW += dz.T @ X[t]
        dU += dz.T @ h_prev
        db += dz.sum(axis=0)
        dX[t] = dz @ W
        dh_next = dz @ U + np.where(m, 0.0, dh)
        dc_next = dc_new * f + np.where(m, 0.0, dc_next)
    return dX, dW, dU, db
