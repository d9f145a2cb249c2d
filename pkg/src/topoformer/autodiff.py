"""Minimal dense-tensor reverse-mode automatic differentiation over numpy.

Double precision throughout.  Broadcasting is restricted to leading
dimensions (a trailing-shape operand may stretch across leading axes);
anything else requires an explicit reshape.  The tape is implicit: every
tensor records its parents and a monotone operation index, and ``backward``
replays reachable nodes in exact reverse execution order.
"""

from __future__ import annotations

import itertools
from contextlib import contextmanager

import numpy as np

from .errors import ParameterError, ShapeError, TopoformerError

__all__ = [
    "Tensor",
    "no_grad",
    "backward",
    "zero_grad",
    "matmul",
    "add",
    "sub",
    "mul",
    "tanh",
    "relu",
    "sigmoid",
    "exp",
    "log",
    "softmax",
    "log_softmax",
    "tensor_sum",
    "tensor_mean",
    "concat",
    "reshape",
    "transpose",
    "embedding_lookup",
    "feature_norm",
]

_op_counter = itertools.count()
_grad_enabled = True


@contextmanager
def no_grad():
    """Disable tape recording (e.g. during evaluation)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "_op_index", "_used")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] | None = None
        self._backward = None
        self._op_index = next(_op_counter)
        self._used = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data, parents, backward_fn) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _leading_broadcast_ok(small: tuple, big: tuple) -> bool:
    offset = len(big) - len(small)
    if offset < 0:
        return False
    if all(d == 1 for d in small):  # scalar-like operands broadcast anywhere
        return True
    pad = (1,) * offset + tuple(small)
    stretched = [i for i in range(len(big)) if pad[i] != big[i]]
    if any(pad[i] != 1 for i in stretched):
        return False
    return stretched == list(range(len(stretched)))


def _check_elementwise(a: Tensor, b: Tensor) -> tuple[int, ...]:
    if a.shape == b.shape:
        return a.shape
    if _leading_broadcast_ok(b.shape, a.shape):
        return a.shape
    if _leading_broadcast_ok(a.shape, b.shape):
        return b.shape
    raise ShapeError(f"incompatible shapes {a.shape} and {b.shape} (leading-dim broadcast only)")


def _reduce_to(grad: np.ndarray, shape: tuple) -> np.ndarray:
    offset = grad.ndim - len(shape)
    if offset:
        grad = grad.sum(axis=tuple(range(offset)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b)
    data = a.data + b.data
    return _node(data, (a, b), lambda g: [(a, _reduce_to(g, a.shape)), (b, _reduce_to(g, b.shape))])


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b)
    data = a.data - b.data
    return _node(data, (a, b), lambda g: [(a, _reduce_to(g, a.shape)), (b, _reduce_to(-g, b.shape))])


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b)
    data = a.data * b.data
    return _node(
        data,
        (a, b),
        lambda g: [(a, _reduce_to(g * b.data, a.shape)), (b, _reduce_to(g * a.data, b.shape))],
    )


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs 2-d or batched operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2] or a.shape[:-2] != b.shape[:-2]:
        raise ShapeError(f"incompatible matmul shapes {a.shape} and {b.shape}")
    data = a.data @ b.data

    def back(g):
        return [
            (a, g @ b.data.swapaxes(-1, -2)),
            (b, a.data.swapaxes(-1, -2) @ g),
        ]

    return _node(data, (a, b), back)


def _unary(a, fn, dfn) -> Tensor:
    a = _as_tensor(a)
    data = fn(a.data)
    return _node(data, (a,), lambda g: [(a, g * dfn(a.data, data))])


def tanh(a) -> Tensor:
    return _unary(a, np.tanh, lambda x, y: 1.0 - y * y)


def relu(a) -> Tensor:
    return _unary(a, lambda x: np.maximum(x, 0.0), lambda x, y: (x > 0).astype(np.float64))


def _stable_sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a) -> Tensor:
    return _unary(a, _stable_sigmoid, lambda x, y: y * (1.0 - y))


def exp(a) -> Tensor:
    return _unary(a, np.exp, lambda x, y: y)


def log(a) -> Tensor:
    return _unary(a, np.log, lambda x, y: 1.0 / x)


def softmax(a, axis: int = -1) -> Tensor:
    a = _as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def back(g):
        inner = (g * s).sum(axis=axis, keepdims=True)
        return [(a, s * (g - inner))]

    return _node(s, (a,), back)


def log_softmax(a, axis: int = -1) -> Tensor:
    a = _as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    s = np.exp(out)

    def back(g):
        return [(a, g - s * g.sum(axis=axis, keepdims=True))]

    return _node(out, (a,), back)


def tensor_sum(a, axis: int | None = None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def back(g):
        if axis is None:
            return [(a, np.broadcast_to(g, a.shape).copy())]
        gg = g if keepdims else np.expand_dims(g, axis)
        return [(a, np.broadcast_to(gg, a.shape).copy())]

    return _node(data, (a,), back)


def tensor_mean(a, axis: int | None = None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    count = a.data.size if axis is None else a.shape[axis]
    data = a.data.mean(axis=axis, keepdims=keepdims)

    def back(g):
        if axis is None:
            return [(a, np.broadcast_to(g, a.shape).copy() / count)]
        gg = g if keepdims else np.expand_dims(g, axis)
        return [(a, np.broadcast_to(gg, a.shape).copy() / count)]

    return _node(data, (a,), back)


def concat(tensors, axis: int = 0) -> Tensor:
    ts = [_as_tensor(t) for t in tensors]
    if not ts:
        raise ParameterError("concat of an empty sequence")
    data = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.shape[axis] for t in ts]
    splits = np.cumsum(sizes)[:-1]

    def back(g):
        pieces = np.split(g, splits, axis=axis)
        return list(zip(ts, pieces))

    return _node(data, tuple(ts), back)


def reshape(a, shape) -> Tensor:
    a = _as_tensor(a)
    data = a.data.reshape(shape)
    return _node(data, (a,), lambda g: [(a, g.reshape(a.shape))])


def transpose(a, axes=None) -> Tensor:
    a = _as_tensor(a)
    data = a.data.transpose(axes)
    inverse = None if axes is None else np.argsort(axes)

    def back(g):
        return [(a, g.transpose(inverse))]

    return _node(data, (a,), back)


def embedding_lookup(table, indices) -> Tensor:
    table = _as_tensor(table)
    idx = np.asarray(indices, dtype=int)
    if table.ndim != 2:
        raise ShapeError(f"embedding table must be 2-d, got {table.shape}")
    data = table.data[idx]

    def back(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx, g)
        return [(table, gt)]

    return _node(data, (table,), back)


_NORM_EPS = 1e-8


def feature_norm(x, gain, bias, axis: int = 1) -> Tensor:
    """Standardize a (nodes, channels) matrix along ``axis`` then apply a
    per-channel affine map.  axis=1 is per-node (layer style), axis=0
    normalizes each channel over the nodes (batch style)."""
    x, gain, bias = _as_tensor(x), _as_tensor(gain), _as_tensor(bias)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ShapeError(f"feature_norm expects a non-empty 2-d input, got {x.shape}")
    if axis not in (0, 1):
        raise ParameterError(f"axis must be 0 or 1, got {axis}")
    if gain.shape != (x.shape[1],) or bias.shape != (x.shape[1],):
        raise ShapeError(
            f"gain/bias must have shape ({x.shape[1]},), got {gain.shape} and {bias.shape}"
        )
    m = x.shape[axis]
    mu = x.data.mean(axis=axis, keepdims=True)
    centered = x.data - mu
    var = (centered**2).mean(axis=axis, keepdims=True)
    inv = 1.0 / np.sqrt(var + _NORM_EPS)
    xhat = centered * inv
    out = xhat * gain.data + bias.data

    def back(g):
        dxhat = g * gain.data
        term = m * dxhat - dxhat.sum(axis=axis, keepdims=True)
        term -= xhat * (dxhat * xhat).sum(axis=axis, keepdims=True)
        return [
            (x, inv / m * term),
            (gain, (g * xhat).sum(axis=0)),
            (bias, g.sum(axis=0)),
        ]

    return _node(out, (x, gain, bias), back)


def backward(loss: Tensor) -> None:
    """Populate ``grad`` on every requires_grad leaf reachable from ``loss``."""
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._used:
        raise TopoformerError("backward was already run on this tape; rebuild the graph")
    loss._used = True
    nodes: dict[int, Tensor] = {}
    stack = [loss]
    while stack:
        t = stack.pop()
        if id(t) in nodes:
            continue
        nodes[id(t)] = t
        for p in t._parents or ():
            if p.requires_grad:
                stack.append(p)
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for t in sorted(nodes.values(), key=lambda n: n._op_index, reverse=True):
        g = grads.pop(id(t), None)
        if g is None:
            continue
        if t._parents is None:
            if t.requires_grad:
                t.grad = g if t.grad is None else t.grad + g
            continue
        for p, pg in t._backward(g):
            if not p.requires_grad:
                continue
            acc = grads.get(id(p))
            grads[id(p)] = pg if acc is None else acc + pg


def zero_grad(params) -> None:
    for p in params:
        p.grad = None
