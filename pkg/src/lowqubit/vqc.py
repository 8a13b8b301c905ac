"""Circuit layer units: the plain VQC and the low-qubit VQC.

The low-qubit unit wraps the circuit with a trainable input map (output
clipped to [-3, 3] before the arctan encoder) and a trainable output
map, so its feature dimension is independent of the qubit count.  The
plain unit encodes the input directly and therefore needs one qubit per
input feature.

Circuit layout per variational block: a linear CNOT chain
(i -> i+1), then one 3-angle rotation per qubit.  Encoding angles and
block angles are both exposed as trainable slots of one circuit; the
backward pass fetches the full parameter-shift Jacobian from the
kernels and chains it through the classical maps.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import autograd as ag
from .autograd import Module, Tensor, as_tensor
from .errors import ConfigError, QubitBudgetError
from .qsim import Circuit, GateKind, GateOp, StateVector, run_circuit
from .qsim.backend import kernels
from .qsim.state import apply_gate

CLIP_RANGE = (-3.0, 3.0)
ROTATIONS_PER_QUBIT = 3
MIN_QUBITS, MAX_LAYER_QUBITS = 2, 10

_num_threads = 1


def set_num_threads(n: int):
    """Thread count for parameter-shift Jacobian rows (1 = strict sequential)."""
    global _num_threads
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    _num_threads = n


def get_num_threads() -> int:
    return _num_threads


def clip(v, lo: float, hi: float):
    """min(hi, max(lo, v)) over scalars or arrays."""
    if lo >= hi:
        raise ConfigError(f"clip bounds must satisfy lo < hi, got [{lo}, {hi}]")
    clipped = np.minimum(hi, np.maximum(lo, v))
    return float(clipped) if np.isscalar(v) else clipped


def encode(y1) -> StateVector:
    """Product state RY(arctan(y1_i))|0> over the entries of y1."""
    y1 = np.atleast_1d(np.asarray(y1, dtype=np.float64))
    ops = tuple(
        GateOp(GateKind.RY, i, params=(float(np.arctan(v)),)) for i, v in enumerate(y1)
    )
    return run_circuit(Circuit(len(y1), ops))


def variational_block(state: StateVector, theta_layer) -> StateVector:
    """One block: CNOT chain i -> i+1, then U3(t1, t2, t3) on every qubit."""
    theta_layer = np.asarray(theta_layer, dtype=np.float64)
    n = state.n_qubits
    if theta_layer.shape != (n, ROTATIONS_PER_QUBIT):
        raise ValueError(
            f"theta layer must be ({n}, {ROTATIONS_PER_QUBIT}), got {theta_layer.shape}"
        )
    for i in range(n - 1):
        state = apply_gate(state, GateOp(GateKind.CNOT, i + 1, control=i))
    for q in range(n):
        state = apply_gate(state, GateOp(GateKind.U3, q, params=tuple(theta_layer[q])))
    return state


def build_vqc_circuit(n_qubits: int, depth: int) -> Circuit:
    """Encoder RYs plus ``depth`` variational blocks, all angles as slots.

    Slot order: the n_qubits encoding angles, then theta flattened as
    (depth, qubit, angle) in C order.
    """
    if depth < 1:
        raise ConfigError(f"depth must be >= 1, got {depth}")
    ops: list[GateOp] = []
    slots: list[tuple[int, int]] = []
    for q in range(n_qubits):
        ops.append(GateOp(GateKind.RY, q, params=(0.0,)))
        slots.append((len(ops) - 1, 0))
    for _ in range(depth):
        for i in range(n_qubits - 1):
            ops.append(GateOp(GateKind.CNOT, i + 1, control=i))
        for q in range(n_qubits):
            ops.append(GateOp(GateKind.U3, q, params=(0.0, 0.0, 0.0)))
            slots.extend([(len(ops) - 1, 0), (len(ops) - 1, 1), (len(ops) - 1, 2)])
    return Circuit(n_qubits, tuple(ops), tuple(slots))


def _jacobian(program, params: np.ndarray, p_lo: int, p_hi: int) -> np.ndarray:
    rows = params.shape[0]
    if _num_threads == 1 or rows < 2 * _num_threads:
        return np.asarray(kernels.jacobian_batch(
            program.n_qubits, program.kinds, program.targets, program.controls,
            program.base_angles, program.slot_ops, program.slot_angles,
            params, p_lo, p_hi,
        ))
    bounds = np.linspace(0, rows, _num_threads + 1, dtype=int)
    chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def work(span):
        a, b = span
        return kernels.jacobian_batch(
            program.n_qubits, program.kinds, program.targets, program.controls,
            program.base_angles, program.slot_ops, program.slot_angles,
            np.ascontiguousarray(params[a:b]), p_lo, p_hi,
        )

    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(work, chunks))
    return np.concatenate([np.asarray(p) for p in parts], axis=0)


def circuit_expectations(angles: Tensor, theta: Tensor, circuit: Circuit) -> Tensor:
    """Per-qubit <Z> of the bound circuit, differentiable in both inputs.

    ``angles`` has shape (..., n_qubits): leading axes are independent
    rows sharing the same theta.  Backward uses the parameter-shift rule
    on every encoding angle and every block angle that needs a gradient.
    """
    angles = as_tensor(angles)
    theta = as_tensor(theta)
    n_q = circuit.n_qubits
    n_enc = n_q
    n_total = circuit.num_params
    rows = angles.data.reshape(-1, n_enc)
    n_rows = rows.shape[0]
    theta_flat = theta.data.reshape(-1)
    if n_enc + theta_flat.shape[0] != n_total:
        raise ValueError("theta size does not match the circuit's trainable slots")

    params = np.empty((n_rows, n_total))
    params[:, :n_enc] = rows
    params[:, n_enc:] = theta_flat
    program = circuit.compile()
    z = np.asarray(kernels.expectations_batch(
        program.n_qubits, program.kinds, program.targets, program.controls,
        program.base_angles, program.slot_ops, program.slot_angles, params,
    ))

    out = Tensor(z.reshape(angles.shape[:-1] + (n_q,)))
    out.requires_grad = angles.requires_grad or theta.requires_grad
    if not out.requires_grad:
        return out
    out._prev = (angles, theta)

    def _bw():
        g_rows = out.grad.reshape(n_rows, n_q)
        p_lo = 0 if angles.requires_grad else n_enc
        p_hi = n_total if theta.requires_grad else n_enc
        jac = _jacobian(program, params, p_lo, p_hi)
        if angles.requires_grad:
            j_enc = jac[:, : n_enc - p_lo, :]
            d_angles = np.einsum("rq,rpq->rp", g_rows, j_enc)
            angles.accumulate(d_angles.reshape(angles.shape))
        if theta.requires_grad:
            j_theta = jac[:, n_enc - p_lo :, :]
            d_theta = np.einsum("rq,rpq->p", g_rows, j_theta)
            theta.accumulate(d_theta.reshape(theta.shape))

    out._backward = _bw
    return out


def _check_layer_qubits(n_qubits: int):
    if not MIN_QUBITS <= n_qubits <= MAX_LAYER_QUBITS:
        raise ConfigError(
            f"layer qubit count must be in [{MIN_QUBITS}, {MAX_LAYER_QUBITS}], "
            f"got {n_qubits}"
        )


def _bilinear_matrix(n_in: int, n_out: int) -> np.ndarray:
    """Fixed linear-interpolation resampling of n_in samples to n_out."""
    m = np.zeros((n_in, n_out))
    if n_in == 1:
        m[0, :] = 1.0
        return m
    positions = np.linspace(0.0, n_in - 1.0, n_out)
    lower = np.floor(positions).astype(int)
    upper = np.minimum(lower + 1, n_in - 1)
    frac = positions - lower
    for j in range(n_out):
        m[lower[j], j] += 1.0 - frac[j]
        m[upper[j], j] += frac[j]
    return m


class VqcTrace:
    """Intermediates retained by a traced forward pass, consumed once."""

    def __init__(self, layer, x, y1_pre, y1, q3, y2):
        self.layer = layer
        self.x = x
        self.y1_pre = y1_pre
        self.y1 = y1
        self.q3 = q3
        self.y2 = y2
        self.consumed = False


class LowQubitVqc(Module):
    """Trainable unit: input map -> clip -> arctan encoder -> circuit -> output map.

    Accepts any input dimension regardless of qubit count.  ``input_map``
    "fc" is the learnable affine squeeze; "bilinear" swaps it for a fixed
    interpolation resample with zero trainable parameters (ablation arm).
    ``clip_range=None`` disables the output clip (ablation arm).
    """

    def __init__(self, n_in: int, n_qubits: int, n_out: int, *, depth: int = 1,
                 clip_range: tuple[float, float] | None = CLIP_RANGE,
                 input_map: str = "fc", rng: np.random.Generator | None = None):
        _check_layer_qubits(n_qubits)
        if n_in < 1 or n_out < 1:
            raise ConfigError("n_in and n_out must be >= 1")
        if input_map not in ("fc", "bilinear"):
            raise ConfigError(f"unknown input map {input_map!r}")
        if clip_range is not None and clip_range[0] >= clip_range[1]:
            raise ConfigError(f"bad clip range {clip_range}")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.n_in = n_in
        self.n_qubits = n_qubits
        self.n_out = n_out
        self.depth = depth
        self.clip_range = clip_range
        self.input_map = input_map
        self.circuit = build_vqc_circuit(n_qubits, depth)
        bound = 1.0 / np.sqrt(n_in)
        if input_map == "fc":
            self.w_in = Tensor(rng.uniform(-bound, bound, (n_in, n_qubits)), requires_grad=True)
            self.b_in = Tensor(rng.uniform(-bound, bound, n_qubits), requires_grad=True)
            self._resample = None
        else:
            self.w_in = None
            self.b_in = None
            self._resample = Tensor(_bilinear_matrix(n_in, n_qubits))
        self.theta = Tensor(
            rng.uniform(-0.1, 0.1, (depth, n_qubits, ROTATIONS_PER_QUBIT)),
            requires_grad=True,
        )
        out_bound = 1.0 / np.sqrt(n_qubits)
        self.w_out = Tensor(rng.uniform(-out_bound, out_bound, (n_qubits, n_out)), requires_grad=True)
        self.b_out = Tensor(rng.uniform(-out_bound, out_bound, n_out), requires_grad=True)

    def _pipeline(self, x: Tensor):
        if x.shape[-1] != self.n_in:
            raise ValueError(f"expected input of size {self.n_in}, got {x.shape[-1]}")
        if self.input_map == "fc":
            y1_pre = x @ self.w_in + self.b_in
        else:
            y1_pre = x @ self._resample
        y1 = ag.clip(y1_pre, *self.clip_range) if self.clip_range else y1_pre
        q3 = circuit_expectations(ag.arctan(y1), self.theta, self.circuit)
        y2 = q3 @ self.w_out + self.b_out
        return y1_pre, y1, q3, y2

    def forward(self, x) -> Tensor:
        return self._pipeline(as_tensor(x))[3]

    def forward_trace(self, x):
        """Forward pass that keeps the intermediates for an explicit backward."""
        x = as_tensor(x)
        y1_pre, y1, q3, y2 = self._pipeline(x)
        return y2, VqcTrace(self, x, y1_pre, y1, q3, y2)

    def backward_from_trace(self, trace: VqcTrace, upstream_grad) -> dict[str, np.ndarray]:
        """Parameter gradients for the traced forward, keyed by parameter name."""
        if trace.consumed or trace.layer is not self:
            raise ValueError("stale trace: not produced by a matching forward call")
        trace.consumed = True
        self.zero_grad()
        trace.y2.backward(np.asarray(upstream_grad, dtype=np.float64))
        return {
            name: p.grad.copy() if p.grad is not None else np.zeros_like(p.data)
            for name, p in self.named_parameters()
        }


class PlainVqc(Module):
    """Direct-encoding VQC: one qubit per input feature, no linear maps."""

    def __init__(self, n_in: int, *, depth: int = 1,
                 rng: np.random.Generator | None = None):
        if n_in > MAX_LAYER_QUBITS:
            raise QubitBudgetError(
                f"plain VQC needs {n_in} qubits for {n_in} inputs, "
                f"over the {MAX_LAYER_QUBITS}-qubit budget"
            )
        _check_layer_qubits(n_in)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.n_in = n_in
        self.n_qubits = n_in
        self.n_out = n_in
        self.depth = depth
        self.circuit = build_vqc_circuit(n_in, depth)
        self.theta = Tensor(
            rng.uniform(-0.1, 0.1, (depth, n_in, ROTATIONS_PER_QUBIT)),
            requires_grad=True,
        )

    def forward(self, x) -> Tensor:
        x = as_tensor(x)
        if x.shape[-1] != self.n_in:
            raise ValueError(f"expected input of size {self.n_in}, got {x.shape[-1]}")
        return circuit_expectations(ag.arctan(x), self.theta, self.circuit)
