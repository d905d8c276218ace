from __future__ import annotations

import numpy as np

from .tensor import DimensionError, Tensor, _emit, as_tensor


def _operands(name, pred, target):
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape:
        raise DimensionError(f"{name}: shapes differ, {pred.shape} vs {target.shape}")
    return pred, target


def smooth_l1(pred, target) -> Tensor:
    """Mean Huber-style loss with unit threshold.

    Per element ``0.5 d**2`` when ``|d| < 1`` and ``|d| - 0.5`` otherwise,
    ``d = pred - target``.  The per-element gradient is ``clip(d, -1, 1) / n``.
    """
    pred, target = _operands("smooth_l1", pred, target)
    d = pred.data - target.data
    ad = np.abs(d)
    quad = ad < 1.0
    n = d.size
    elem = np.where(quad, 0.5 * d * d, ad - 0.5)
    dgrad = np.clip(d, -1.0, 1.0) / n

    def back(g):
        gg = float(g) * dgrad
        return gg, -gg

    return _emit("smooth_l1", np.array(elem.mean()), (pred, target), back)


def l2_loss(pred, target) -> Tensor:
    """Mean squared error."""
    pred, target = _operands("l2_loss", pred, target)
    d = pred.data - target.data
    n = d.size

    def back(g):
        gg = float(g) * 2.0 * d / n
        return gg, -gg

    return _emit("l2_loss", np.array((d * d).mean()), (pred, target), back)


LOSSES = {"smooth_l1": smooth_l1, "l2": l2_loss}
