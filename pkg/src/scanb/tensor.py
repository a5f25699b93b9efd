"""Dense float64 tensors with reverse-mode automatic differentiation.

Every tensor wraps a row-major numpy float64 array. Operations record
backward closures on an implicit tape; node ids are assigned in creation
order, so creation order is a valid topological order and `backward`
replays it deterministically. Broadcasting is limited to numpy's
trailing-axis alignment (leading-dimension batch), plus scalars.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor",
    "as_tensor",
    "no_grad",
    "grad_enabled",
    "set_finite_checks",
    "matmul",
    "softmax",
    "softmax_rows",
    "concat",
    "conv2d",
    "backward",
]

_node_counter = 0
_grad_enabled = True
_finite_checks = True


def _next_id() -> int:
    global _node_counter
    _node_counter += 1
    return _node_counter


class no_grad:
    """Context manager disabling tape recording (inference / numeric probes)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def grad_enabled() -> bool:
    return _grad_enabled


def set_finite_checks(enabled: bool) -> None:
    """Toggle per-op NaN/inf guards. On by default; forward ops must stay finite."""
    global _finite_checks
    _finite_checks = bool(enabled)


class Tensor:
    """A float64 array plus an optional link into the gradient tape."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "node_id")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple = ()
        self._backward = None
        self.node_id = _next_id() if requires_grad else 0

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _result(data: np.ndarray, parents, backward_fn) -> "Tensor":
        if _finite_checks and not np.all(np.isfinite(data)):
            raise FloatingPointError("non-finite value produced by a forward op")
        out = Tensor.__new__(Tensor)
        out.data = data
        out.grad = None
        out._parents = ()
        out._backward = None
        tracked = _grad_enabled and any(p.requires_grad for p in parents)
        out.requires_grad = tracked
        if tracked:
            out.node_id = _next_id()
            out._parents = tuple(p for p in parents if p.requires_grad)
            out._backward = backward_fn
        else:
            out.node_id = 0
        return out

    # -- basic protocol --------------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, grad={'yes' if self.requires_grad else 'no'})"

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(as_tensor(other), self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return slice_(self, key)

    # -- shaped views -----------------------------------------------------------

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 or isinstance(shape[0], int) else shape[0])

    def transpose2d(self):
        return swapaxes(self, -1, -2)

    @property
    def T(self):
        return swapaxes(self, -1, -2)

    # -- reductions ---------------------------------------------------------------

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean_(self, axis=axis, keepdims=keepdims)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a gradient back to `shape` after numpy trailing-axis broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# -- elementwise ops ------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data + b.data

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g, b.shape))

    return Tensor._result(out_data, (a, b), bw)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data - b.data

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(-g, b.shape))

    return Tensor._result(out_data, (a, b), bw)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data * b.data

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g * a.data, b.shape))

    return Tensor._result(out_data, (a, b), bw)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data / b.data

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g / b.data, a.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(-g * a.data / (b.data * b.data), b.shape))

    return Tensor._result(out_data, (a, b), bw)


def pow_(a, exponent: float) -> Tensor:
    a = as_tensor(a)
    out_data = a.data**exponent

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(g * exponent * a.data ** (exponent - 1.0))

    return Tensor._result(out_data, (a,), bw)


def square(a) -> Tensor:
    return pow_(a, 2.0)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.exp(a.data)

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(g * out.data)

    return Tensor._result(out_data, (a,), bw)


def log(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.log(a.data)

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(g / a.data)

    return Tensor._result(out_data, (a,), bw)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.tanh(a.data)

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(g * (1.0 - out.data * out.data))

    return Tensor._result(out_data, (a,), bw)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out_data = 1.0 / (1.0 + np.exp(-a.data))

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(g * out.data * (1.0 - out.data))

    return Tensor._result(out_data, (a,), bw)


def relu(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.maximum(a.data, 0.0)

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(g * (a.data > 0.0))

    return Tensor._result(out_data, (a,), bw)


def clamp(a, lo: float, hi: float) -> Tensor:
    """Clip values to [lo, hi]; gradient passes only where unclipped."""
    a = as_tensor(a)
    out_data = np.clip(a.data, lo, hi)

    def bw(g, out):
        if a.requires_grad:
            mask = (a.data >= lo) & (a.data <= hi)
            a.accumulate_grad(g * mask)

    return Tensor._result(out_data, (a,), bw)


# -- linear algebra --------------------------------------------------------------


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ValueError(f"matmul needs >=2-d operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"matmul inner dimension mismatch: {a.shape} @ {b.shape}")
    out_data = np.matmul(a.data, b.data)

    def bw(g, out):
        if a.requires_grad:
            ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
            a.accumulate_grad(_unbroadcast(ga, a.shape))
        if b.requires_grad:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            b.accumulate_grad(_unbroadcast(gb, b.shape))

    return Tensor._result(out_data, (a, b), bw)


def softmax(a, axis: int = -1) -> Tensor:
    """Shift-invariant softmax along `axis` (row max subtracted internally)."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def bw(g, out):
        if a.requires_grad:
            y = out.data
            dot = (g * y).sum(axis=axis, keepdims=True)
            a.accumulate_grad(y * (g - dot))

    return Tensor._result(out_data, (a,), bw)


def softmax_rows(a) -> Tensor:
    """Row-wise softmax of a 2-d tensor; each output row sums to 1."""
    a = as_tensor(a)
    if a.ndim != 2:
        raise ValueError(f"softmax_rows expects a 2-d tensor, got shape {a.shape}")
    return softmax(a, axis=-1)


# -- shape ops ---------------------------------------------------------------------


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.reshape(shape)

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(g.reshape(a.shape))

    return Tensor._result(out_data, (a,), bw)


def swapaxes(a, ax1: int, ax2: int) -> Tensor:
    a = as_tensor(a)
    out_data = np.swapaxes(a.data, ax1, ax2).copy()

    def bw(g, out):
        if a.requires_grad:
            a.accumulate_grad(np.swapaxes(g, ax1, ax2))

    return Tensor._result(out_data, (a,), bw)


def slice_(a, key) -> Tensor:
    a = as_tensor(a)
    out_data = a.data[key].copy()

    def bw(g, out):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            full[key] += g
            a.accumulate_grad(full)

    return Tensor._result(out_data, (a,), bw)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ValueError("concat of an empty list")
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]

    def bw(g, out):
        offset = 0
        for t, n in zip(tensors, sizes):
            if t.requires_grad:
                index = [slice(None)] * g.ndim
                index[axis] = slice(offset, offset + n)
                t.accumulate_grad(g[tuple(index)])
            offset += n

    return Tensor._result(out_data, tensors, bw)


def sum_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def bw(g, out):
        if a.requires_grad:
            if axis is None:
                a.accumulate_grad(np.broadcast_to(g, a.shape).copy())
            else:
                g2 = g if keepdims else np.expand_dims(g, axis)
                a.accumulate_grad(np.broadcast_to(g2, a.shape).copy())

    return Tensor._result(np.asarray(out_data), (a,), bw)


def mean_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.mean(axis=axis, keepdims=keepdims)
    if axis is None:
        count = a.size
    elif isinstance(axis, tuple):
        count = int(np.prod([a.shape[ax] for ax in axis]))
    else:
        count = a.shape[axis]

    def bw(g, out):
        if a.requires_grad:
            if axis is None:
                a.accumulate_grad(np.broadcast_to(g / count, a.shape).copy())
            else:
                g2 = g if keepdims else np.expand_dims(g, axis)
                a.accumulate_grad(np.broadcast_to(g2 / count, a.shape).copy())

    return Tensor._result(np.asarray(out_data), (a,), bw)


# -- convolution ---------------------------------------------------------------------


def conv2d(x, w, b=None, stride: int = 1, padding: int = 0) -> Tensor:
    """2-d convolution on NCHW input with OIHW weights.

    Forward is im2col + one matmul; backward scatters column gradients
    back with one strided add per kernel tap.
    """
    x, w = as_tensor(x), as_tensor(w)
    if x.ndim != 4 or w.ndim != 4:
        raise ValueError(f"conv2d expects 4-d input/weight, got {x.shape}, {w.shape}")
    B, C, H, W = x.shape
    F, Cw, KH, KW = w.shape
    if C != Cw:
        raise ValueError(f"conv2d channel mismatch: input {x.shape} vs weight {w.shape}")
    s, p = stride, padding
    OH = (H + 2 * p - KH) // s + 1
    OW = (W + 2 * p - KW) // s + 1
    xp = np.pad(x.data, ((0, 0), (0, 0), (p, p), (p, p))) if p else x.data
    sB, sC, sH, sW = xp.strides
    cols = np.lib.stride_tricks.as_strided(
        xp,
        shape=(B, OH, OW, C, KH, KW),
        strides=(sB, sH * s, sW * s, sC, sH, sW),
        writeable=False,
    )
    cols2 = cols.reshape(B * OH * OW, C * KH * KW)
    w2 = w.data.reshape(F, C * KH * KW)
    out_flat = cols2 @ w2.T
    if b is not None:
        b = as_tensor(b)
        out_flat = out_flat + b.data
    out_data = out_flat.reshape(B, OH, OW, F).transpose(0, 3, 1, 2)
    parents = (x, w) if b is None else (x, w, b)

    def bw(g, out):
        g2 = g.transpose(0, 2, 3, 1).reshape(B * OH * OW, F)
        if b is not None and b.requires_grad:
            b.accumulate_grad(g2.sum(axis=0))
        if w.requires_grad:
            w.accumulate_grad((g2.T @ cols2).reshape(w.shape))
        if x.requires_grad:
            dcols = (g2 @ w2).reshape(B, OH, OW, C, KH, KW)
            dxp = np.zeros((B, C, H + 2 * p, W + 2 * p))
            for kh in range(KH):
                for kw in range(KW):
                    dxp[:, :, kh : kh + s * OH : s, kw : kw + s * OW : s] += dcols[
                        :, :, :, :, kh, kw
                    ].transpose(0, 3, 1, 2)
            x.accumulate_grad(dxp[:, :, p : p + H, p : p + W] if p else dxp)

    return Tensor._result(out_data, parents, bw)


# -- backward pass ----------------------------------------------------------------------


def backward(loss: Tensor) -> None:
    """Reverse-mode sweep from a scalar loss; accumulates into .grad fields."""
    if not isinstance(loss, Tensor):
        raise TypeError("backward expects a Tensor")
    if loss.shape not in ((), (1,)):
        raise ValueError(f"backward requires a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ValueError("loss is not connected to any trainable parameter")

    # Reachable subgraph, then replay in reverse creation order (a valid
    # reverse-topological order because parents precede children).
    seen = {}
    stack = [loss]
    while stack:
        node = stack.pop()
        if node.node_id in seen:
            continue
        seen[node.node_id] = node
        stack.extend(node._parents)

    loss.accumulate_grad(np.ones_like(loss.data))
    for node_id in sorted(seen, reverse=True):
        node = seen[node_id]
        if node._backward is not None:
            node._backward(node.grad, node)
            node.grad = None  # interior grads are transient; leaves keep theirs
