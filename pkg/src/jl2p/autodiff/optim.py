from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import ContractError


@dataclass
class OptimizerState:
    algorithm: str = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: dict = field(default_factory=dict)  # per-parameter step counts for bias correction
    step: int = 0

    def __post_init__(self):
        if self.algorithm not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.algorithm!r}")
        if not self.lr > 0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")


def clip_grad_norm(params: dict, max_norm: float) -> float:
    """Scale all grads in place so their global L2 norm is at most ``max_norm``."""
    total = float(np.sqrt(sum(float(np.sum(p.grad * p.grad))
                              for p in params.values() if p.grad is not None)))
    if total > max_norm:
        s = max_norm / total
        for p in params.values():
            if p.grad is not None:
                p.grad = p.grad * s
    return total


def optimizer_step(params: dict, state: OptimizerState):
    """Update every tensor in ``params`` from its grad, then clear the grads.

    Adam moments only advance for the parameters passed in, so parameters off
    the active path keep their accumulators untouched.
    """
    missing = sorted(k for k, p in params.items() if p.grad is None)
    if missing:
        raise ContractError(f"no gradient for parameters: {', '.join(missing)}")
    state.step += 1
    for name in sorted(params):
        p = params[name]
        g = p.grad
        if state.algorithm == "sgd":
            p.data = p.data - state.lr * g
        else:
            m = state.m.get(name)
            if m is None:
                m = np.zeros_like(p.data)
                state.v[name] = np.zeros_like(p.data)
                state.t[name] = 0
            state.t[name] += 1
            k = state.t[name]
            m = state.beta1 * m + (1 - state.beta1) * g
            v = state.beta2 * state.v[name] + (1 - state.beta2) * g * g
            state.m[name], state.v[name] = m, v
            m_hat = m / (1 - state.beta1 ** k)
            v_hat = v / (1 - state.beta2 ** k)
            p.data = p.data - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        p.grad = None
