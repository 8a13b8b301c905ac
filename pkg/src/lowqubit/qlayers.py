"""Hybrid layers built on the low-qubit VQC, plus their classical halves.

QConv1d slides a shared VQC over signal windows, the QGRU cell wires
five VQCs into a gated recurrence, and QAttention puts VQC blocks on the
projection and output paths of scaled dot-product attention.
"""

import numpy as np

from . import autograd as ag
from .autograd import Module, Tensor, as_tensor
from .errors import ConfigError
from .vqc import LowQubitVqc, PlainVqc

# re-exported classical primitives
relu = ag.relu
sigmoid = ag.sigmoid
tanh = ag.tanh
softmax = ag.softmax


def linear(x, weight, bias=None):
    out = as_tensor(x) @ weight
    return out if bias is None else out + bias


def maxpool1d(x, width: int) -> Tensor:
    """Non-overlapping max over the last axis (remainder dropped)."""
    x = as_tensor(x)
    length = x.shape[-1]
    if length < width or width < 1:
        raise ValueError(f"cannot pool length {length} with window {width}")
    n_windows = length // width
    trimmed = x[..., : n_windows * width]
    windows = trimmed.reshape(x.shape[:-1] + (n_windows, width))
    data = windows.data.max(axis=-1)
    out = Tensor(data)
    out.requires_grad = x.requires_grad
    if out.requires_grad:
        out._prev = (windows,)
        argmax = windows.data.argmax(axis=-1)

        def _bw():
            g = np.zeros_like(windows.data)
            np.put_along_axis(g, argmax[..., None], out.grad[..., None], axis=-1)
            windows.accumulate(g)

        out._backward = _bw
    return out


def global_avg(x) -> Tensor:
    """Mean over the last axis."""
    x = as_tensor(x)
    if x.shape[-1] == 0:
        raise ValueError("cannot average an empty axis")
    return x.mean(axis=-1)


def unfold1d(x, kernel_size: int, stride: int) -> Tensor:
    """Slide windows over (..., C, L) giving (..., W, C * kernel_size).

    Each window is the flattened channel-major slice x[..., t*s : t*s+k].
    """
    x = as_tensor(x)
    length = x.shape[-1]
    if length < kernel_size:
        raise ValueError(f"input length {length} shorter than kernel {kernel_size}")
    n_windows = (length - kernel_size) // stride + 1
    gather = (np.arange(n_windows) * stride)[:, None] + np.arange(kernel_size)[None, :]
    data = x.data[..., gather]                      # (..., C, W, k)
    data = np.moveaxis(data, -3, -2)                # (..., W, C, k)
    new_shape = data.shape[:-2] + (data.shape[-2] * data.shape[-1],)
    out = Tensor(data.reshape(new_shape))
    out.requires_grad = x.requires_grad
    if out.requires_grad:
        out._prev = (x,)

        def _bw():
            g = out.grad.reshape(data.shape)
            g = np.moveaxis(g, -2, -3)              # (..., C, W, k)
            dx = np.zeros_like(x.data)
            np.add.at(dx, (..., gather), g)
            x.accumulate(dx)

        out._backward = _bw
    return out


class Linear(Module):
    """Affine map with fan-in uniform init."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        bound = 1.0 / np.sqrt(n_in)
        self.weight = Tensor(rng.uniform(-bound, bound, (n_in, n_out)), requires_grad=True)
        self.bias = Tensor(rng.uniform(-bound, bound, n_out), requires_grad=True)

    def forward(self, x) -> Tensor:
        return as_tensor(x) @ self.weight + self.bias


class Conv1d(Module):
    """Classical valid 1-D convolution over (..., C, L)."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 stride: int, rng: np.random.Generator):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.proj = Linear(in_channels * kernel_size, out_channels, rng)

    def forward(self, x) -> Tensor:
        windows = unfold1d(x, self.kernel_size, self.stride)   # (..., W, C*k)
        out = self.proj(windows)                                # (..., W, out)
        axes = tuple(range(out.ndim - 2)) + (out.ndim - 1, out.ndim - 2)
        return out.transpose(axes)                              # (..., out, W)


class QConv1d(Module):
    """1-D convolution whose window transform is a shared VQC.

    ``variant`` "lowqubit" processes each flattened in_channels * k window
    through one LowQubitVqc; "plain" feeds the k raw samples straight in
    as encoding angles (requires in_channels == 1, out_channels == k ==
    n_qubits).
    """

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 stride: int, n_qubits: int, *, variant: str = "lowqubit",
                 depth: int = 1, clip_range=(-3.0, 3.0), input_map: str = "fc",
                 rng: np.random.Generator | None = None):
        if stride < 1:
            raise ConfigError(f"stride must be >= 1, got {stride}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.variant = variant
        if variant == "lowqubit":
            self.vqc = LowQubitVqc(
                in_channels * kernel_size, n_qubits, out_channels,
                depth=depth, clip_range=clip_range, input_map=input_map, rng=rng,
            )
        elif variant == "plain":
            if in_channels != 1:
                raise ConfigError("plain VQC convolution supports in_channels == 1 only")
            if n_qubits != kernel_size:
                raise ConfigError(
                    f"plain VQC convolution needs n_qubits == kernel_size, "
                    f"got {n_qubits} != {kernel_size}"
                )
            if out_channels != n_qubits:
                raise ConfigError(
                    "plain VQC convolution emits one channel per qubit; "
                    f"out_channels must equal {n_qubits}"
                )
            self.vqc = PlainVqc(kernel_size, depth=depth, rng=rng)
        else:
            raise ConfigError(f"unknown variant {variant!r}")

    def output_length(self, length: int) -> int:
        if length < self.kernel_size:
            raise ValueError(f"input length {length} shorter than kernel {self.kernel_size}")
        return (length - self.kernel_size) // self.stride + 1

    def forward(self, x) -> Tensor:
        x = as_tensor(x)
        if x.shape[-2] != self.in_channels:
            raise ValueError(f"expected {self.in_channels} channels, got {x.shape[-2]}")
        windows = unfold1d(x, self.kernel_size, self.stride)     # (..., W, C*k)
        out = self.vqc(windows)                                   # (..., W, out)
        axes = tuple(range(out.ndim - 2)) + (out.ndim - 1, out.ndim - 2)
        return out.transpose(axes)                                # (..., out, W)


class QGRUCell(Module):
    """Gated recurrent cell with five low-qubit VQC sub-units.

    The reset/update/candidate units read concat(h_prev, x_t); the mixed
    state h' = (1-z) * h_prev + z * (r * h~) then feeds two trailing
    units producing the step output y_t and the next hidden state h_t.
    """

    def __init__(self, input_size: int, hidden_size: int, n_qubits: int, *,
                 depth: int = 1, rng: np.random.Generator | None = None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.input_size = input_size
        self.hidden_size = hidden_size
        joint = input_size + hidden_size
        self.vqc_r = LowQubitVqc(joint, n_qubits, hidden_size, depth=depth, rng=rng)
        self.vqc_z = LowQubitVqc(joint, n_qubits, hidden_size, depth=depth, rng=rng)
        self.vqc_h = LowQubitVqc(joint, n_qubits, hidden_size, depth=depth, rng=rng)
        self.vqc_y = LowQubitVqc(hidden_size, n_qubits, hidden_size, depth=depth, rng=rng)
        self.vqc_out_h = LowQubitVqc(hidden_size, n_qubits, hidden_size, depth=depth, rng=rng)

    def step(self, x_t, h_prev):
        """One timestep; returns (y_t, h_t)."""
        x_t, h_prev = as_tensor(x_t), as_tensor(h_prev)
        if x_t.shape[-1] != self.input_size:
            raise ValueError(f"expected input size {self.input_size}, got {x_t.shape[-1]}")
        if h_prev.shape[-1] != self.hidden_size:
            raise ValueError(f"expected hidden size {self.hidden_size}, got {h_prev.shape[-1]}")
        v = ag.concat([h_prev, x_t], axis=-1)
        r = ag.sigmoid(self.vqc_r(v))
        z = ag.sigmoid(self.vqc_z(v))
        h_cand = ag.tanh(self.vqc_h(v))
        h_mix = (1.0 - z) * h_prev + z * (r * h_cand)
        return self.vqc_y(h_mix), self.vqc_out_h(h_mix)

    def forward(self, xs, h0=None):
        """Run a sequence (seq_len, input_size); returns (ys, h_final)."""
        xs = as_tensor(xs)
        h = as_tensor(np.zeros(self.hidden_size)) if h0 is None else as_tensor(h0)
        ys = []
        for t in range(xs.shape[0]):
            y, h = self.step(xs[t], h)
            ys.append(y)
        return ag.stack(ys, axis=0), h


class SingleHeadQAttention(Module):
    """Scaled dot-product attention with VQC blocks on the query and output."""

    def __init__(self, d_head: int, n_qubits: int, *, depth: int = 1,
                 clip_range=(-3.0, 3.0), input_map: str = "fc",
                 rng: np.random.Generator | None = None):
        self.d_head = d_head
        self.vqc_in = LowQubitVqc(d_head, n_qubits, d_head, depth=depth,
                                  clip_range=clip_range, input_map=input_map, rng=rng)
        self.vqc_out_head = LowQubitVqc(d_head, n_qubits, d_head, depth=depth,
                                        clip_range=clip_range, input_map=input_map, rng=rng)

    def forward(self, q, k, v) -> Tensor:
        q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
        if q.shape[-1] != self.d_head or k.shape[-1] != self.d_head or v.shape[-1] != self.d_head:
            raise ValueError(f"q, k, v must have width {self.d_head}")
        q_enc = self.vqc_in(q)
        scores = (q_enc @ k.T) * (1.0 / np.sqrt(self.d_head))
        attn = ag.softmax(scores, axis=-1)
        return self.vqc_out_head(attn @ v)

    def attention_weights(self, q, k) -> np.ndarray:
        q_enc = self.vqc_in(as_tensor(q))
        scores = (q_enc @ as_tensor(k).T) * (1.0 / np.sqrt(self.d_head))
        return ag.softmax(scores, axis=-1).data


class QAttention(Module):
    """Multi-head attention with VQC projections and a VQC on the output.

    Q, K, V come from row-wise VQCs over the model width, heads run the
    single-head unit on their slice, and the concatenated result passes
    through a final VQC.  Input and output are (seq_len, model_dim).
    """

    def __init__(self, model_dim: int, n_heads: int, n_qubits: int, *,
                 depth: int = 1, clip_range=(-3.0, 3.0), input_map: str = "fc",
                 rng: np.random.Generator | None = None):
        if model_dim % n_heads != 0:
            raise ConfigError(f"model_dim {model_dim} not divisible by {n_heads} heads")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.model_dim = model_dim
        self.n_heads = n_heads
        self.d_head = model_dim // n_heads
        kwargs = dict(depth=depth, clip_range=clip_range, input_map=input_map, rng=rng)
        self.vqc_q = LowQubitVqc(model_dim, n_qubits, model_dim, **kwargs)
        self.vqc_k = LowQubitVqc(model_dim, n_qubits, model_dim, **kwargs)
        self.vqc_v = LowQubitVqc(model_dim, n_qubits, model_dim, **kwargs)
        self.heads = [
            SingleHeadQAttention(self.d_head, n_qubits, **kwargs)
            for _ in range(n_heads)
        ]
        self.vqc_final = LowQubitVqc(model_dim, n_qubits, model_dim, **kwargs)

    def forward(self, x) -> Tensor:
        x = as_tensor(x)
        if x.ndim != 2 or x.shape[1] != self.model_dim:
            raise ValueError(f"expected (seq_len, {self.model_dim}) input, got {x.shape}")
        q = self.vqc_q(x)
        k = self.vqc_k(x)
        v = self.vqc_v(x)
        outputs = []
        for i, head in enumerate(self.heads):
            sl = slice(i * self.d_head, (i + 1) * self.d_head)
            outputs.append(head(q[:, sl], k[:, sl], v[:, sl]))
        return self.vqc_final(ag.concat(outputs, axis=-1))
