"""Minimal reverse-mode autodiff over numpy arrays.

Tensors are 1-D/2-D float32 arrays (float64 is accepted so numeric gradient
verification can run at higher precision). Every forward op validates shapes,
rejects non-finite outputs, and records a backward closure; the tape is
rebuilt on every forward pass. Ops never mutate their operands, so tensors
built once can be shared read-only across threads; backward() accumulates
into .grad and belongs to whoever owns the training loop.
"""

from __future__ import annotations

import math

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes do not match an op's contract."""


class NonFiniteError(FloatingPointError):
    """Raised when an op produces NaN/Inf, naming the offending op."""


class GradientError(FloatingPointError):
    """Raised when backward propagates a non-finite gradient."""


_ALLOWED_DTYPES = (np.float32, np.float64)


def _as_array(data, dtype):
    arr = np.asarray(data)
    if arr.dtype not in _ALLOWED_DTYPES:
        arr = arr.astype(dtype if dtype is not None else np.float32)
    elif dtype is not None and arr.dtype != dtype:
        arr = arr.astype(dtype)
    return arr


def _check_finite(arr: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite values produced by op '{op}'")


class Tensor:
    """Array node on the autodiff tape."""

    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, dtype=None,
                 _parents=(), _backward=None, op: str = "leaf"):
        self.data = _as_array(data, dtype)
        _check_finite(self.data, op)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.op = op
        self._parents = tuple(_parents)
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self) -> None:
        """Reverse-mode sweep from a scalar output."""
        if self.data.size != 1:
            raise ShapeError("backward() requires a scalar tensor")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise GradientError(f"non-finite gradient flowing into op '{node.op}'")
            if node.requires_grad:
                node._accumulate(g)
            if node._backward is None:
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None:
                    continue
                if not np.all(np.isfinite(pg)):
                    raise GradientError(
                        f"non-finite gradient produced by backward of op "
                        f"'{node.op}'")
                if id(parent) in grads:
                    grads[id(parent)] += pg
                else:
                    # own the buffer: backward closures may return views
                    # or aliases of g shared between parents
                    grads[id(parent)] = np.array(pg, copy=True)

    def __repr__(self):
        return f"Tensor(shape={tuple(self.shape)}, op={self.op!r})"


def _result(data, parents, backward, op):
    t = Tensor(data, _parents=parents, _backward=backward, op=op)
    return t


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"add: {a.shape} vs {b.shape}")
    return _result(a.data + b.data, (a, b), lambda g: (g, g), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"sub: {a.shape} vs {b.shape}")
    return _result(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"mul: {a.shape} vs {b.shape}")
    return _result(a.data * b.data, (a, b),
                   lambda g: (g * b.data, g * a.data), "mul")


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    return _result(a.data * c, (a,), lambda g: (g * c,), "scale")


def shift(a: Tensor, c: float) -> Tensor:
    """Add a constant offset."""
    c = float(c)
    return _result(a.data + c, (a,), lambda g: (g,), "shift")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")
    return _result(a.data @ b.data, (a, b),
                   lambda g: (g @ b.data.T, a.data.T @ g), "matmul")


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeError(f"transpose expects 2-D, got {a.shape}")
    return _result(a.data.T.copy(), (a,), lambda g: (g.T,), "transpose")


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    if int(np.prod(shape)) != a.data.size:
        raise ShapeError(f"reshape {a.shape} -> {shape}")
    return _result(a.data.reshape(shape).copy(), (a,),
                   lambda g: (g.reshape(a.shape),), "reshape")


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ShapeError("concat of zero tensors")
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return _result(np.concatenate([t.data for t in tensors], axis=axis),
                   tuple(tensors), backward, "concat")


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    if a.data.ndim != 2 or not (0 <= start < stop <= a.shape[1]):
        raise ShapeError(f"slice_cols[{start}:{stop}] on {a.shape}")

    def backward(g):
        out = np.zeros_like(a.data)
        out[:, start:stop] = g
        return (out,)

    return _result(a.data[:, start:stop].copy(), (a,), backward, "slice_cols")


def sigmoid(a: Tensor) -> Tensor:
    s = _sigmoid_np(a.data)
    return _result(s, (a,), lambda g: (g * s * (1.0 - s),), "sigmoid")


def _sigmoid_np(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def absolute(a: Tensor) -> Tensor:
    return _result(np.abs(a.data), (a,), lambda g: (g * np.sign(a.data),), "abs")


def total(a: Tensor) -> Tensor:
    return _result(np.array(a.data.sum(), dtype=a.dtype), (a,),
                   lambda g: (np.broadcast_to(g, a.shape).astype(a.dtype, copy=True),),
                   "sum")


def mean(a: Tensor) -> Tensor:
    n = a.data.size
    return _result(np.array(a.data.mean(), dtype=a.dtype), (a,),
                   lambda g: ((np.broadcast_to(g, a.shape) / n).astype(a.dtype, copy=True),),
                   "mean")


def broadcast_col(v: Tensor, length: int) -> Tensor:
    """Tile a vector [D] into a [D, length] sequence."""
    if v.data.ndim != 1:
        raise ShapeError(f"broadcast_col expects 1-D, got {v.shape}")
    if length < 1:
        raise ShapeError("broadcast_col: length must be >= 1")
    out = np.repeat(v.data[:, None], length, axis=1)
    return _result(out, (v,), lambda g: (g.sum(axis=1),), "broadcast_col")


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    """x: [C, L], b: [C], broadcast over columns."""
    if x.data.ndim != 2 or b.data.ndim != 1 or x.shape[0] != b.shape[0]:
        raise ShapeError(f"add_bias: {x.shape} + {b.shape}")
    return _result(x.data + b.data[:, None], (x, b),
                   lambda g: (g, g.sum(axis=1)), "add_bias")


def embedding(table: Tensor, ids) -> Tensor:
    """Row lookup: table [V, D], ids [L] ints -> [L, D]."""
    idx = np.asarray(ids)
    if idx.ndim != 1:
        raise ShapeError(f"embedding ids must be 1-D, got {idx.shape}")
    if idx.size == 0:
        raise ShapeError("embedding: empty id sequence")
    if idx.min() < 0 or idx.max() >= table.shape[0]:
        raise ShapeError(
            f"embedding id out of range [0, {table.shape[0]}): "
            f"min={idx.min()}, max={idx.max()}")
    idx = idx.astype(np.int64)

    def backward(g):
        dt = np.zeros_like(table.data)
        np.add.at(dt, idx, g)
        return (dt,)

    return _result(table.data[idx], (table,), backward, "embedding")


def softmax_rows(a: Tensor) -> Tensor:
    """Row-wise softmax of a 2-D tensor.

    Row denominators go through math.fsum, so the result is invariant (bit
    for bit) under any permutation of the columns.
    """
    if a.data.ndim != 2:
        raise ShapeError(f"softmax_rows expects 2-D, got {a.shape}")
    x = a.data
    e = np.exp(x - x.max(axis=1, keepdims=True))
    denom = np.array([math.fsum(row) for row in e], dtype=x.dtype)
    s = e / denom[:, None]

    def backward(g):
        dot = (g * s).sum(axis=1, keepdims=True)
        return (s * (g - dot),)

    return _result(s, (a,), backward, "softmax_rows")


def conv1d(x: Tensor, w: Tensor, b: Tensor, padding: str = "same") -> Tensor:
    """1-D convolution, length preserving.

    x: [C_in, L], w: [C_out, C_in, K], b: [C_out]. `same` pads K//2 zeros on
    both sides (K must be odd); `causal` pads K-1 zeros on the left only.
    """
    if x.data.ndim != 2 or w.data.ndim != 3:
        raise ShapeError(f"conv1d: x {x.shape}, w {w.shape}")
    c_out, c_in, k = w.shape
    if x.shape[0] != c_in:
        raise ShapeError(
            f"conv1d channel mismatch: expected input [{c_in}, L], got {x.shape}")
    if b.shape != (c_out,):
        raise ShapeError(f"conv1d bias: expected ({c_out},), got {b.shape}")
    length = x.shape[1]
    if padding == "same":
        if k % 2 == 0:
            raise ShapeError(f"same-padded conv1d requires odd kernel, got {k}")
        left = right = k // 2
    elif padding == "causal":
        left, right = k - 1, 0
    else:
        raise ValueError(f"unknown padding {padding!r}")

    xp = np.pad(x.data, ((0, 0), (left, right)))
    # im2col: one [C_out, K*C_in] x [K*C_in, L] product instead of K small ones
    windows = np.lib.stride_tricks.sliding_window_view(xp, k, axis=1)  # [C_in, L, K]
    cols = windows.transpose(2, 0, 1).reshape(k * c_in, length)
    w2d = w.data.transpose(0, 2, 1).reshape(c_out, k * c_in)
    y = w2d @ cols + b.data[:, None]

    def backward(g):
        dw = (g @ cols.T).reshape(c_out, k, c_in).transpose(0, 2, 1).copy()
        db = g.sum(axis=1)
        dcols = (w2d.T @ g).reshape(k, c_in, length)
        dxp = np.zeros_like(xp)
        for j in range(k):
            dxp[:, j:j + length] += dcols[j]
        dx = dxp[:, left:left + length] if right == 0 else dxp[:, left:-right]
        return (dx, dw, db)

    return _result(y, (x, w, b), backward, "conv1d")


def glu(x: Tensor) -> Tensor:
    """Gated linear unit over the channel axis: [2C, L] -> [C, L]."""
    if x.data.ndim != 2 or x.shape[0] % 2 != 0:
        raise ShapeError(f"glu expects [2C, L], got {x.shape}")
    c = x.shape[0] // 2
    a, gate = x.data[:c], x.data[c:]
    sig = _sigmoid_np(gate)
    out = a * sig

    def backward(g):
        da = g * sig
        dgate = g * a * sig * (1.0 - sig)
        return (np.concatenate([da, dgate], axis=0),)

    return _result(out, (x,), backward, "glu")


def scaled_dot_attention(q: Tensor, k: Tensor, v: Tensor) -> tuple[Tensor, Tensor]:
    """Dot-product attention with 1/sqrt(d) scaling.

    q: [L, d], k: [N, d], v: [N, d]. Returns (scores [L, N], out [L, d])
    where each scores row is a softmax distribution over the N keys.
    """
    if q.data.ndim != 2 or k.data.ndim != 2 or v.data.ndim != 2:
        raise ShapeError("attention operands must be 2-D")
    if q.shape[1] != k.shape[1]:
        raise ShapeError(f"attention d mismatch: Q {q.shape} vs K {k.shape}")
    if k.shape[0] != v.shape[0]:
        raise ShapeError(f"attention N mismatch: K {k.shape} vs V {v.shape}")
    d = q.shape[1]
    logits = scale(matmul(q, transpose(k)), 1.0 / math.sqrt(d))
    scores = softmax_rows(logits)
    out = matmul(scores, v)
    return scores, out
