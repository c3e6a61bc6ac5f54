"""Minimal reverse-mode automatic differentiation over numpy arrays.

A Tensor wraps a float64 ndarray and records the operation that produced
it. ``backward()`` on a scalar loss topologically sorts the recorded
graph and accumulates exact gradients into every tensor that requires
them. Leaves with ``requires_grad=False`` (frozen parameters, constants)
receive no gradient and contribute no graph bookkeeping, so inference
with frozen parameters runs as plain numpy.

Only the operations the models need are implemented; each op defines its
own backward closure over the forward operands.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcasted gradient back down to the original shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    # keep numpy from absorbing `ndarray <op> Tensor`; defer to our __r*__ ops
    __array_ufunc__ = None

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    # -- graph plumbing ---------------------------------------------------

    @staticmethod
    def _lift(value) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    @staticmethod
    def _node(data, parents, backward) -> "Tensor":
        out = Tensor(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward
        return out

    def _accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        self.grad = grad if self.grad is None else self.grad + grad

    def backward(self) -> None:
        """Accumulate dL/dt into every reachable tensor requiring grad."""
        if self.data.ndim != 0:
            raise ShapeError("backward() requires a scalar loss")
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
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- shape helpers ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def __len__(self) -> int:
        return len(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "Tensor":
        a, b = self, Tensor._lift(other)
        data = a.data + b.data

        def backward(g):
            a._accumulate(_unbroadcast(g, a.data.shape))
            b._accumulate(_unbroadcast(g, b.data.shape))

        return Tensor._node(data, (a, b), backward)

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        a = self

        def backward(g):
            a._accumulate(-g)

        return Tensor._node(-a.data, (a,), backward)

    def __sub__(self, other) -> "Tensor":
        return self + (-Tensor._lift(other))

    def __rsub__(self, other) -> "Tensor":
        return Tensor._lift(other) + (-self)

    def __mul__(self, other) -> "Tensor":
        a, b = self, Tensor._lift(other)
        data = a.data * b.data

        def backward(g):
            a._accumulate(_unbroadcast(g * b.data, a.data.shape))
            b._accumulate(_unbroadcast(g * a.data, b.data.shape))

        return Tensor._node(data, (a, b), backward)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        a, b = self, Tensor._lift(other)
        data = a.data / b.data

        def backward(g):
            a._accumulate(_unbroadcast(g / b.data, a.data.shape))
            b._accumulate(_unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

        return Tensor._node(data, (a, b), backward)

    def __rtruediv__(self, other) -> "Tensor":
        return Tensor._lift(other) / self

    def __matmul__(self, other) -> "Tensor":
        a, b = self, Tensor._lift(other)
        if a.data.ndim not in (1, 2) or b.data.ndim not in (1, 2):
            raise ShapeError("matmul supports 1-D and 2-D operands only")
        data = a.data @ b.data

        def backward(g):
            ad, bd = a.data, b.data
            if ad.ndim == 2 and bd.ndim == 2:
                a._accumulate(g @ bd.T)
                b._accumulate(ad.T @ g)
            elif ad.ndim == 2 and bd.ndim == 1:
                a._accumulate(np.outer(g, bd))
                b._accumulate(ad.T @ g)
            elif ad.ndim == 1 and bd.ndim == 2:
                a._accumulate(bd @ g)
                b._accumulate(np.outer(ad, g))
            else:
                a._accumulate(g * bd)
                b._accumulate(g * ad)

        return Tensor._node(data, (a, b), backward)

    # -- elementwise nonlinearities -----------------------------------------

    def relu(self) -> "Tensor":
        a = self
        mask = a.data > 0

        def backward(g):
            a._accumulate(g * mask)

        return Tensor._node(np.where(mask, a.data, 0.0), (a,), backward)

    def exp(self) -> "Tensor":
        a = self
        data = np.exp(a.data)

        def backward(g):
            a._accumulate(g * data)

        return Tensor._node(data, (a,), backward)

    def log(self) -> "Tensor":
        a = self

        def backward(g):
            a._accumulate(g / a.data)

        return Tensor._node(np.log(a.data), (a,), backward)

    def sigmoid(self) -> "Tensor":
        a = self
        x = a.data
        data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

        def backward(g):
            a._accumulate(g * data * (1.0 - data))

        return Tensor._node(data, (a,), backward)

    def clip(self, lo: float, hi: float) -> "Tensor":
        """Clamp values; gradient passes only through unclamped slots."""
        a = self
        mask = (a.data >= lo) & (a.data <= hi)

        def backward(g):
            a._accumulate(g * mask)

        return Tensor._node(np.clip(a.data, lo, hi), (a,), backward)

    # -- shape ops ------------------------------------------------------------

    def sum(self, axis=None) -> "Tensor":
        a = self
        data = a.data.sum(axis=axis)

        def backward(g):
            if axis is None:
                a._accumulate(np.broadcast_to(g, a.data.shape).copy())
            else:
                a._accumulate(np.broadcast_to(np.expand_dims(g, axis), a.data.shape).copy())

        return Tensor._node(data, (a,), backward)

    def mean(self) -> "Tensor":
        return self.sum() * (1.0 / self.data.size)

    def reshape(self, shape) -> "Tensor":
        a = self

        def backward(g):
            a._accumulate(g.reshape(a.data.shape))

        return Tensor._node(a.data.reshape(shape), (a,), backward)


def concat(parts: list[Tensor], axis: int = 0) -> Tensor:
    parts = [Tensor._lift(p) for p in parts]
    data = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(lo, hi)
            p._accumulate(g[tuple(index)])

    return Tensor._node(data, tuple(parts), backward)


def gather_rows(t: Tensor, indices: np.ndarray) -> Tensor:
    """Row lookup out[k] = t[indices[k]]; rows may repeat."""
    a = t
    idx = np.asarray(indices, dtype=np.intp)

    def backward(g):
        buf = np.zeros_like(a.data)
        np.add.at(buf, idx, g)
        a._accumulate(buf)

    return Tensor._node(a.data[idx], (a,), backward)


def segment_sum(t: Tensor, seg_ids: np.ndarray, num_segments: int) -> Tensor:
    """out[s] = sum of rows of t whose seg_ids equal s.

    seg_ids must be sorted ascending and cover every segment in
    [0, num_segments) at least once; the GNN guarantees this by adding a
    self loop per node. The sortedness enables np.add.reduceat.
    """
    a = t
    ids = np.asarray(seg_ids, dtype=np.intp)
    starts = np.searchsorted(ids, np.arange(num_segments))
    # reduceat silently copies the next row for an empty segment; reject
    if len(ids) == 0 or starts[-1] >= len(ids) or (np.diff(starts) <= 0).any():
        raise ShapeError("segment_sum requires sorted seg_ids covering every segment")
    data = np.add.reduceat(a.data, starts, axis=0)

    def backward(g):
        a._accumulate(g[ids])

    return Tensor._node(data, (a,), backward)


def softmax_cross_entropy(logits: Tensor, labels: np.ndarray) -> tuple[Tensor, np.ndarray]:
    """Mean negative log-likelihood plus the (detached) class probabilities.

    Stabilized by row-max subtraction; gradient is (softmax - onehot)/n.
    """
    a = logits
    y = np.asarray(labels, dtype=np.intp)
    if a.data.ndim != 2 or y.shape != (a.data.shape[0],):
        raise ShapeError("softmax_cross_entropy expects (n, C) logits and (n,) labels")
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    probs = exps / exps.sum(axis=1, keepdims=True)
    n = a.data.shape[0]
    nll = -(shifted[np.arange(n), y] - np.log(exps.sum(axis=1)))
    loss_value = nll.mean()

    def backward(g):
        grad = probs.copy()
        grad[np.arange(n), y] -= 1.0
        a._accumulate(g * grad / n)

    loss = Tensor._node(np.asarray(loss_value), (a,), backward)
    return loss, probs
