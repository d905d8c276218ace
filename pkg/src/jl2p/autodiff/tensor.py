"""Tensors, the operation tape and the reverse sweep.

Operations are plain functions.  When a :class:`Tape` is active (``with tape:``)
and at least one input requires a gradient, the op is appended to the tape
together with a closure mapping the output gradient to input gradients.
Without an active tape ops run eagerly and record nothing, which is what
inference uses.
"""

from __future__ import annotations

import numpy as np


class DimensionError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class ContractError(RuntimeError):
    """A precondition of the autodiff API was violated."""


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(self, data, requires_grad=False, name=None):
        arr = np.array(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite value in tensor {name or ''}".strip())
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.name = name

    @classmethod
    def _wrap(cls, arr, requires_grad):
        # op outputs skip the finiteness scan
        t = cls.__new__(cls)
        t.data = arr
        t.requires_grad = requires_grad
        t.grad = None
        t.name = None
        return t

    @property
    def shape(self):
        return self.data.shape

    @property
    def values(self):
        return self.data.ravel()

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


class _Op:
    __slots__ = ("name", "out", "inputs", "backward")

    def __init__(self, name, out, inputs, backward):
        self.name = name
        self.out = out
        self.inputs = inputs
        self.backward = backward


_ACTIVE: list = []


class Tape:
    """Ordered record of executed ops; inputs always precede the ops consuming them."""

    def __init__(self):
        self.ops: list[_Op] = []
        self._outputs: set[int] = set()
        self.visits = 0

    def __enter__(self):
        _ACTIVE.append(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE.pop()
        return False

    def __len__(self):
        return len(self.ops)

    def record(self, name, out, inputs, backward):
        self.ops.append(_Op(name, out, inputs, backward))
        self._outputs.add(id(out))

    def produced(self, t: Tensor) -> bool:
        return id(t) in self._outputs


def active_tape():
    return _ACTIVE[-1] if _ACTIVE else None


def _emit(name, arr, inputs, backward):
    needs = any(t.requires_grad for t in inputs)
    tape = active_tape()
    out = Tensor._wrap(arr, needs and tape is not None)
    if out.requires_grad:
        tape.record(name, out, inputs, backward)
    return out


def backward(loss: Tensor, tape: Tape):
    """Populate ``.grad`` of every grad-requiring leaf reachable from ``loss``.

    Gradients accumulate into existing ``.grad`` arrays, so two calls without
    zeroing add up.
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not tape.produced(loss):
        raise ContractError("loss was not produced on this tape")
    grads = {id(loss): np.ones_like(loss.data)}
    leaves = {}
    for op in reversed(tape.ops):
        tape.visits += 1
        g = grads.pop(id(op.out), None)
        if g is None:
            continue
        in_grads = op.backward(g)
        for t, gi in zip(op.inputs, in_grads):
            if gi is None or not t.requires_grad:
                continue
            key = id(t)
            grads[key] = grads[key] + gi if key in grads else gi
            if not tape.produced(t):
                leaves[key] = t
    for key, t in leaves.items():
        g = grads[key]
        t.grad = g.copy() if t.grad is None else t.grad + g


# ---------------------------------------------------------------------------
# operations


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(op, a, b):
    sa, sb = a.shape, b.shape
    for x, y in zip(reversed(sa), reversed(sb)):
        if x != y and x != 1 and y != 1:
            raise DimensionError(f"{op}: cannot broadcast shapes {sa} and {sb}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    A, B = a.data, b.data

    def back(g):
        return (g @ B.T if a.requires_grad else None,
                A.T @ g if b.requires_grad else None)

    return _emit("matmul", A @ B, (a, b), back)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a, b)
    sa, sb = a.shape, b.shape

    def back(g):
        return _unbroadcast(g, sa), _unbroadcast(g, sb)

    return _emit("add", a.data + b.data, (a, b), back)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a, b)
    sa, sb = a.shape, b.shape

    def back(g):
        return _unbroadcast(g, sa), _unbroadcast(-g, sb)

    return _emit("sub", a.data - b.data, (a, b), back)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("mul", a, b)
    A, B = a.data, b.data

    def back(g):
        return (_unbroadcast(g * B, A.shape) if a.requires_grad else None,
                _unbroadcast(g * A, B.shape) if b.requires_grad else None)

    return _emit("mul", A * B, (a, b), back)


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    return _emit("scale", a.data * c, (a,), lambda g: (g * c,))


def sigmoid(a: Tensor) -> Tensor:
    # split by sign so exp never overflows
    x = a.data
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return _emit("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return _emit("tanh", out, (a,), lambda g: (g * (1.0 - out * out),))


def concat(tensors, axis=-1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise DimensionError("concat: no inputs")
    nd = tensors[0].data.ndim
    ax = axis % nd
    for t in tensors[1:]:
        if t.data.ndim != nd or any(
                t.shape[i] != tensors[0].shape[i] for i in range(nd) if i != ax):
            raise DimensionError(
                f"concat: shapes {[t.shape for t in tensors]} disagree off axis {axis}")
    bounds = np.cumsum([0] + [t.shape[ax] for t in tensors])

    def back(g):
        return tuple(np.take(g, range(lo, hi), axis=ax)
                     for lo, hi in zip(bounds[:-1], bounds[1:]))

    return _emit("concat", np.concatenate([t.data for t in tensors], axis=ax),
                 tuple(tensors), back)


def slice_(a: Tensor, start: int, stop: int, axis=-1) -> Tensor:
    """Contiguous slice ``[start:stop]`` along ``axis``."""
    ax = axis % a.data.ndim
    n = a.shape[ax]
    if not 0 <= start < stop <= n:
        raise DimensionError(f"slice: [{start}:{stop}] out of range for axis of size {n}")
    idx = [slice(None)] * a.data.ndim
    idx[ax] = slice(start, stop)
    idx = tuple(idx)
    shape = a.shape

    def back(g):
        full = np.zeros(shape)
        full[idx] = g
        return (full,)

    return _emit("slice", a.data[idx], (a,), back)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    if int(np.prod(shape)) != a.size:
        raise DimensionError(f"reshape: cannot view {a.shape} as {shape}")
    old = a.shape
    return _emit("reshape", a.data.reshape(shape), (a,), lambda g: (g.reshape(old),))


def stack(tensors, axis=0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise DimensionError(f"stack: differing shapes {sorted(shapes)}")
    out = np.stack([t.data for t in tensors], axis=axis)
    ax = axis % out.ndim

    def back(g):
        return tuple(np.take(g, i, axis=ax) for i in range(len(tensors)))

    return _emit("stack", out, tuple(tensors), back)


def sum_(a: Tensor) -> Tensor:
    shape = a.shape
    return _emit("sum", np.array(a.data.sum()), (a,),
                 lambda g: (np.full(shape, float(g)),))


def mean(a: Tensor) -> Tensor:
    shape, n = a.shape, a.size
    return _emit("mean", np.array(a.data.mean()), (a,),
                 lambda g: (np.full(shape, float(g) / n),))
