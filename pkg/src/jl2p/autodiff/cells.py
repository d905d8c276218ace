"""GRU and LSTM cells plus a linear layer, built from tape primitives.

Parameters are plain ``dict[str, Tensor]``.  Gate blocks are stored fused
along the column axis: GRU ``[reset | update | candidate]``, LSTM
``[input | forget | cell | output]``.  Inputs may be a single vector ``(d,)``
or a batch ``(B, d)``; the output has the matching rank.
"""

from __future__ import annotations

import numpy as np

from .tensor import (DimensionError, Tensor, add, matmul, mul, reshape, sigmoid,
                     slice_, sub, tanh)


def _uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def init_linear(rng, d_in, d_out):
    return {"W": _uniform(rng, (d_in, d_out), d_in), "b": _uniform(rng, (d_out,), d_in)}


def init_gru(rng, d_in, d_h):
    return {
        "W_x": _uniform(rng, (d_in, 3 * d_h), d_in),
        "W_h": _uniform(rng, (d_h, 3 * d_h), d_h),
        "b_x": _uniform(rng, (3 * d_h,), d_h),
        "b_h": _uniform(rng, (3 * d_h,), d_h),
    }


def init_lstm(rng, d_in, d_h):
    return {
        "W_x": _uniform(rng, (d_in, 4 * d_h), d_in),
        "W_h": _uniform(rng, (d_h, 4 * d_h), d_h),
        "b": _uniform(rng, (4 * d_h,), d_h),
    }


def _as_batch(x, d, what):
    if x.data.ndim == 1:
        if x.shape[0] != d:
            raise DimensionError(f"{what}: expected width {d}, got shape {x.shape}")
        return reshape(x, (1, d)), True
    if x.data.ndim != 2 or x.shape[1] != d:
        raise DimensionError(f"{what}: expected (B, {d}), got shape {x.shape}")
    return x, False


def linear(x: Tensor, p) -> Tensor:
    d_in = p["W"].shape[0]
    xb, single = _as_batch(x, d_in, "linear input")
    y = add(matmul(xb, p["W"]), p["b"])
    return reshape(y, (y.shape[1],)) if single else y


def gru_cell(x: Tensor, h_prev: Tensor, p) -> Tensor:
    d_in, three_h = p["W_x"].shape
    H = three_h // 3
    if p["W_h"].shape != (H, three_h) or p["b_x"].shape != (three_h,) \
            or p["b_h"].shape != (three_h,):
        raise DimensionError("gru_cell: inconsistent parameter shapes")
    xb, single = _as_batch(x, d_in, "gru_cell input")
    hb, _ = _as_batch(h_prev, H, "gru_cell state")
    if hb.shape[0] != xb.shape[0]:
        raise DimensionError(f"gru_cell: batch sizes differ {xb.shape} vs {hb.shape}")
    gx = add(matmul(xb, p["W_x"]), p["b_x"])
    gh = add(matmul(hb, p["W_h"]), p["b_h"])
    r = sigmoid(add(slice_(gx, 0, H), slice_(gh, 0, H)))
    z = sigmoid(add(slice_(gx, H, 2 * H), slice_(gh, H, 2 * H)))
    n = tanh(add(slice_(gx, 2 * H, 3 * H), mul(r, slice_(gh, 2 * H, 3 * H))))
    # (1 - z) * n + z * h_prev
    h = add(n, mul(z, sub(hb, n)))
    return reshape(h, (H,)) if single else h


def lstm_cell(x: Tensor, state, p):
    h_prev, c_prev = state
    d_in, four_h = p["W_x"].shape
    H = four_h // 4
    if p["W_h"].shape != (H, four_h) or p["b"].shape != (four_h,):
        raise DimensionError("lstm_cell: inconsistent parameter shapes")
    xb, single = _as_batch(x, d_in, "lstm_cell input")
    hb, _ = _as_batch(h_prev, H, "lstm_cell hidden state")
    cb, _ = _as_batch(c_prev, H, "lstm_cell cell state")
    if not xb.shape[0] == hb.shape[0] == cb.shape[0]:
        raise DimensionError("lstm_cell: batch sizes differ")
    g = add(add(matmul(xb, p["W_x"]), matmul(hb, p["W_h"])), p["b"])
    i = sigmoid(slice_(g, 0, H))
    f = sigmoid(slice_(g, H, 2 * H))
    cand = tanh(slice_(g, 2 * H, 3 * H))
    o = sigmoid(slice_(g, 3 * H, 4 * H))
    c = add(mul(f, cb), mul(i, cand))
    h = mul(o, tanh(c))
    if single:
        return reshape(h, (H,)), reshape(c, (H,))
    return h, c
