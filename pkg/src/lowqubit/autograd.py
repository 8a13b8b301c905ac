"""Minimal reverse-mode autodiff over numpy arrays.

Enough tape machinery to differentiate the hybrid layers end to end:
elementwise arithmetic with broadcasting, matmul against 2-D weights,
shape ops, the nonlinearities the layers need, and a Module base class
for parameter bookkeeping.  Quantum expectation ops hook in from
``vqc`` by building nodes with custom backward closures, following the
same conventions as the ops here.

Everything is float64; gradients accumulate into ``Tensor.grad``.
"""

import numpy as np


def _as_array(value) -> np.ndarray:
    return np.asarray(value, dtype=np.float64)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """A numpy array plus the tape node that produced it."""

    __slots__ = ("data", "grad", "requires_grad", "_backward", "_prev")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._backward = None
        self._prev = ()

    # -- graph plumbing -------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def accumulate(self, grad: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def backward(self, grad=None):
        """Backpropagate from this node; seeds with ones for scalars."""
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() on a non-scalar needs an explicit gradient")
            grad = np.ones_like(self.data)
        else:
            grad = _as_array(grad).reshape(self.data.shape)

        topo: list[Tensor] = []
        seen = set()
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
            for parent in node._prev:
                if id(parent) not in seen:
                    stack.append((parent, False))

        self.accumulate(grad)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward()

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        out = _node(self.data + other.data, (self, other))

        def _bw():
            if self.requires_grad:
                self.accumulate(_unbroadcast(out.grad, self.shape))
            if other.requires_grad:
                other.accumulate(_unbroadcast(out.grad, other.shape))

        out._backward = _bw
        return out

    __radd__ = __add__

    def __mul__(self, other):
        other = as_tensor(other)
        out = _node(self.data * other.data, (self, other))

        def _bw():
            if self.requires_grad:
                self.accumulate(_unbroadcast(out.grad * other.data, self.shape))
            if other.requires_grad:
                other.accumulate(_unbroadcast(out.grad * self.data, other.shape))

        out._backward = _bw
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __truediv__(self, other):
        other = as_tensor(other)
        out = _node(self.data / other.data, (self, other))

        def _bw():
            if self.requires_grad:
                self.accumulate(_unbroadcast(out.grad / other.data, self.shape))
            if other.requires_grad:
                other.accumulate(
                    _unbroadcast(-out.grad * self.data / other.data**2, other.shape)
                )

        out._backward = _bw
        return out

    def __pow__(self, exponent: float):
        out = _node(self.data**exponent, (self,))

        def _bw():
            if self.requires_grad:
                self.accumulate(out.grad * exponent * self.data ** (exponent - 1))

        out._backward = _bw
        return out

    def __matmul__(self, other):
        other = as_tensor(other)
        a, b = self.data, other.data
        if b.ndim > 2:
            raise NotImplementedError("matmul right operand must be 1-D or 2-D")
        out = _node(a @ b, (self, other))

        def _bw():
            g = out.grad
            if b.ndim == 1:
                if a.ndim == 1:  # dot product
                    if self.requires_grad:
                        self.accumulate(g * b)
                    if other.requires_grad:
                        other.accumulate(g * a)
                else:  # (..., n) @ (n,)
                    if self.requires_grad:
                        self.accumulate(np.expand_dims(g, -1) * b)
                    if other.requires_grad:
                        other.accumulate(a.reshape(-1, b.shape[0]).T @ g.reshape(-1))
                return
            # b is 2-D: rows of a against a weight matrix
            if self.requires_grad:
                self.accumulate(g @ b.T)
            if other.requires_grad:
                other.accumulate(a.reshape(-1, b.shape[0]).T @ g.reshape(-1, b.shape[1]))

        out._backward = _bw
        return out

    # -- reductions and shaping -------------------------------------------

    def sum(self, axis=None, keepdims=False):
        out = _node(self.data.sum(axis=axis, keepdims=keepdims), (self,))

        def _bw():
            if not self.requires_grad:
                return
            g = out.grad
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self.accumulate(np.broadcast_to(g, self.shape).copy())

        out._backward = _bw
        return out

    def mean(self, axis=None, keepdims=False):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out = _node(self.data.reshape(shape), (self,))

        def _bw():
            if self.requires_grad:
                self.accumulate(out.grad.reshape(self.shape))

        out._backward = _bw
        return out

    def transpose(self, *axes):
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        elif len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        inverse = np.argsort(axes)
        out = _node(self.data.transpose(axes), (self,))

        def _bw():
            if self.requires_grad:
                self.accumulate(out.grad.transpose(inverse))

        out._backward = _bw
        return out

    @property
    def T(self):
        return self.transpose()

    def __getitem__(self, index):
        out = _node(self.data[index], (self,))

        def _bw():
            if self.requires_grad:
                g = np.zeros_like(self.data)
                np.add.at(g, index, out.grad)
                self.accumulate(g)

        out._backward = _bw
        return out


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _node(data: np.ndarray, parents: tuple) -> Tensor:
    out = Tensor(data)
    out.requires_grad = any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._prev = parents
    return out


# -- elementwise nonlinearities -------------------------------------------


def relu(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out = _node(np.maximum(x.data, 0.0), (x,))

    def _bw():
        if x.requires_grad:
            x.accumulate(out.grad * (x.data > 0))

    out._backward = _bw
    return out


def sigmoid(x: Tensor) -> Tensor:
    x = as_tensor(x)
    s = 1.0 / (1.0 + np.exp(-x.data))
    out = _node(s, (x,))

    def _bw():
        if x.requires_grad:
            x.accumulate(out.grad * s * (1.0 - s))

    out._backward = _bw
    return out


def tanh(x: Tensor) -> Tensor:
    x = as_tensor(x)
    t = np.tanh(x.data)
    out = _node(t, (x,))

    def _bw():
        if x.requires_grad:
            x.accumulate(out.grad * (1.0 - t * t))

    out._backward = _bw
    return out


def arctan(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out = _node(np.arctan(x.data), (x,))

    def _bw():
        if x.requires_grad:
            x.accumulate(out.grad / (1.0 + x.data**2))

    out._backward = _bw
    return out


def exp(x: Tensor) -> Tensor:
    x = as_tensor(x)
    e = np.exp(x.data)
    out = _node(e, (x,))

    def _bw():
        if x.requires_grad:
            x.accumulate(out.grad * e)

    out._backward = _bw
    return out


def log(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out = _node(np.log(x.data), (x,))

    def _bw():
        if x.requires_grad:
            x.accumulate(out.grad / x.data)

    out._backward = _bw
    return out


def clip(x: Tensor, lo: float, hi: float) -> Tensor:
    """Clamp with hard-zero gradient outside [lo, hi]."""
    from .errors import ConfigError

    if lo >= hi:
        raise ConfigError(f"clip bounds must satisfy lo < hi, got [{lo}, {hi}]")
    x = as_tensor(x)
    out = _node(np.clip(x.data, lo, hi), (x,))
    mask = (x.data >= lo) & (x.data <= hi)

    def _bw():
        if x.requires_grad:
            x.accumulate(out.grad * mask)

    out._backward = _bw
    return out


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Shift-invariant softmax (max subtracted before exponentiation)."""
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)
    out = _node(s, (x,))

    def _bw():
        if x.requires_grad:
            g = out.grad
            x.accumulate(s * (g - (g * s).sum(axis=axis, keepdims=True)))

    out._backward = _bw
    return out


# -- structural ops ---------------------------------------------------------


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = _node(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def _bw():
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                idx = [slice(None)] * out.grad.ndim
                idx[axis] = slice(lo, hi)
                t.accumulate(out.grad[tuple(idx)])

    out._backward = _bw
    return out


def stack(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = _node(np.stack([t.data for t in tensors], axis=axis), tuple(tensors))

    def _bw():
        for i, t in enumerate(tensors):
            if t.requires_grad:
                t.accumulate(np.take(out.grad, i, axis=axis))

    out._backward = _bw
    return out


# -- module base -------------------------------------------------------------


class Module:
    """Parameter container; subclasses implement ``forward``."""

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def named_parameters(self, prefix: str = ""):
        """Yield (name, tensor) pairs in attribute declaration order."""
        for name, value in vars(self).items():
            full = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                yield full, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{full}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{full}.{i}.")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(p.data.size for p in self.parameters())

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None
