"""Desk-scale model assemblies and their checkpoint format.

QM5Mini is a two-block quantum-convolution classifier over raw
waveforms; M5Mini is its classical twin; QTransformerMini is a tiny
sequence classifier around one quantum multi-head attention block.
"""

import json
import struct
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from . import autograd as ag
from .autograd import Module, Tensor, as_tensor
from .errors import ConfigError
from .qlayers import Conv1d, Linear, QAttention, QConv1d, global_avg, maxpool1d, relu

CHECKPOINT_MAGIC = b"QSPC"
CHECKPOINT_VERSION = 1


class ModelKind(str, Enum):
    M5_MINI = "m5-mini"
    QM5_MINI = "qm5-mini"
    QTRANSFORMER_MINI = "qtransformer-mini"


class VqcVariant(str, Enum):
    LOWQUBIT = "lowqubit"
    PLAIN = "plain"


class LtVariant(str, Enum):
    FC = "fc"
    BILINEAR = "bilinear"


@dataclass(frozen=True)
class ModelSpec:
    """Everything needed to rebuild a model's architecture."""

    kind: ModelKind
    n_qubits: int = 4
    vqc_variant: VqcVariant = VqcVariant.LOWQUBIT
    lt_variant: LtVariant = LtVariant.FC
    clip_enabled: bool = True
    depth: int = 1
    widths: tuple[int, ...] = ()
    n_classes: int = 4
    input_length: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "vqc_variant", VqcVariant(self.vqc_variant))
        object.__setattr__(self, "lt_variant", LtVariant(self.lt_variant))
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))

    def to_json(self) -> str:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["vqc_variant"] = self.vqc_variant.value
        d["lt_variant"] = self.lt_variant.value
        d["widths"] = list(self.widths)
        return json.dumps(d, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "ModelSpec":
        return ModelSpec(**json.loads(text))


_QM5_KERNELS = ((8, 4), (4, 2))  # (kernel, stride) per conv block
_QM5_POOL = 4


def _vqc_kwargs(spec: ModelSpec, rng):
    return dict(
        depth=spec.depth,
        clip_range=(-3.0, 3.0) if spec.clip_enabled else None,
        input_map=spec.lt_variant.value,
        rng=rng,
    )


class QM5Mini(Module):
    """Raw-waveform classifier: two quantum conv blocks, pool, linear head."""

    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        c1, c2 = spec.widths
        (k1, s1), (k2, s2) = _QM5_KERNELS
        if spec.vqc_variant == VqcVariant.PLAIN:
            if spec.n_qubits != k1:
                raise ConfigError(
                    f"plain variant runs kernel-sized circuits: n_qubits must be "
                    f"{k1}, got {spec.n_qubits}"
                )
            self.conv1 = QConv1d(1, c1, k1, s1, spec.n_qubits, variant="plain",
                                 depth=spec.depth, rng=rng)
        else:
            self.conv1 = QConv1d(1, c1, k1, s1, spec.n_qubits,
                                 **_vqc_kwargs(spec, rng))
        self.conv2 = QConv1d(c1, c2, k2, s2, spec.n_qubits, **_vqc_kwargs(spec, rng))
        self.head = Linear(c2, spec.n_classes, rng)
        self.spec = spec

    def forward(self, batch) -> Tensor:
        x = as_tensor(batch)
        x = relu(self.conv1(x))
        x = maxpool1d(x, _QM5_POOL)
        x = relu(self.conv2(x))
        x = global_avg(x)
        return self.head(x)

    def prepare(self, waveforms: np.ndarray) -> np.ndarray:
        """(B, L) waveforms -> (B, 1, L) model input."""
        w = np.asarray(waveforms, dtype=np.float64)
        return w[:, None, :]


class M5Mini(Module):
    """Classical twin of QM5Mini with plain convolutions."""

    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        c1, c2 = spec.widths
        (k1, s1), (k2, s2) = _QM5_KERNELS
        self.conv1 = Conv1d(1, c1, k1, s1, rng)
        self.conv2 = Conv1d(c1, c2, k2, s2, rng)
        self.head = Linear(c2, spec.n_classes, rng)
        self.spec = spec

    def forward(self, batch) -> Tensor:
        x = as_tensor(batch)
        x = relu(self.conv1(x))
        x = maxpool1d(x, _QM5_POOL)
        x = relu(self.conv2(x))
        x = global_avg(x)
        return self.head(x)

    def prepare(self, waveforms: np.ndarray) -> np.ndarray:
        w = np.asarray(waveforms, dtype=np.float64)
        return w[:, None, :]


def sinusoidal_positions(seq_len: int, dim: int) -> np.ndarray:
    """Fixed sin/cos position table (seq_len, dim)."""
    pos = np.arange(seq_len)[:, None]
    i = np.arange(dim)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / dim)
    table = np.where(i % 2 == 0, np.sin(angle), np.cos(angle))
    return table


class QTransformerMini(Module):
    """Patch-sequence classifier with one quantum attention block."""

    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        seq_len, d_model, n_heads, d_ff = spec.widths
        if spec.input_length % seq_len != 0:
            raise ConfigError(
                f"input_length {spec.input_length} not divisible by seq_len {seq_len}"
            )
        self.seq_len = seq_len
        self.patch = spec.input_length // seq_len
        self.embed = Linear(self.patch, d_model, rng)
        self.pos = Tensor(sinusoidal_positions(seq_len, d_model))
        self.attn = QAttention(d_model, n_heads, spec.n_qubits, **_vqc_kwargs(spec, rng))
        self.ff1 = Linear(d_model, d_ff, rng)
        self.ff2 = Linear(d_ff, d_model, rng)
        self.head = Linear(d_model, spec.n_classes, rng)
        self.spec = spec

    def _encode_one(self, seq: Tensor) -> Tensor:
        x = self.embed(seq) + self.pos
        x = x + self.attn(x)
        x = x + self.ff2(relu(self.ff1(x)))
        return x.mean(axis=0)

    def forward(self, batch) -> Tensor:
        x = as_tensor(batch)
        if x.ndim != 3 or x.shape[1] != self.seq_len or x.shape[2] != self.patch:
            raise ValueError(
                f"expected (B, {self.seq_len}, {self.patch}) input, got {x.shape}"
            )
        pooled = ag.stack([self._encode_one(x[b]) for b in range(x.shape[0])], axis=0)
        return self.head(pooled)

    def prepare(self, waveforms: np.ndarray) -> np.ndarray:
        w = np.asarray(waveforms, dtype=np.float64)
        return w.reshape(w.shape[0], self.seq_len, self.patch)


def default_widths(spec: ModelSpec) -> tuple[int, ...]:
    if spec.kind == ModelKind.QTRANSFORMER_MINI:
        return (8, 8, 2, 16)
    if spec.vqc_variant == VqcVariant.PLAIN:
        return (spec.n_qubits, 16)
    return (8, 16)


def build_model(spec: ModelSpec, seed: int) -> Module:
    """Deterministically construct and initialize a model from its spec."""
    if spec.n_qubits not in (2, 4, 8):
        raise ConfigError(f"n_qubits must be 2, 4 or 8, got {spec.n_qubits}")
    if spec.vqc_variant == VqcVariant.PLAIN and spec.kind != ModelKind.QM5_MINI:
        raise ConfigError("the plain VQC variant applies to qm5-mini only")
    if not spec.widths:
        spec = ModelSpec(**{**asdict(spec), "widths": default_widths(spec)})
    rng = np.random.default_rng(seed)
    if spec.kind == ModelKind.QM5_MINI:
        return QM5Mini(spec, rng)
    if spec.kind == ModelKind.M5_MINI:
        return M5Mini(spec, rng)
    return QTransformerMini(spec, rng)


def parameter_count(spec: ModelSpec) -> int:
    """Trainable scalar count; a pure function of the spec."""
    return build_model(spec, seed=0).num_parameters()


def save_checkpoint(path, model: Module):
    """Write magic, version, spec JSON, then every tensor as f64 LE."""
    spec_json = model.spec.to_json().encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<H", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(spec_json)))
        fh.write(spec_json)
        for _, p in model.named_parameters():
            fh.write(p.data.astype("<f8").tobytes())


def load_checkpoint(path) -> Module:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}")
        (version,) = struct.unpack("<H", fh.read(2))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        (spec_len,) = struct.unpack("<I", fh.read(4))
        spec = ModelSpec.from_json(fh.read(spec_len).decode("utf-8"))
        model = build_model(spec, seed=0)
        for name, p in model.named_parameters():
            raw = fh.read(8 * p.data.size)
            if len(raw) != 8 * p.data.size:
                raise ValueError(f"checkpoint truncated at parameter {name}")
            p.data = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(p.data.shape)
        if fh.read(1):
            raise ValueError("trailing bytes after parameters")
    return model
