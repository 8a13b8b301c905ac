"""Circuits: ordered gate lists with trainable parameter slots."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from .backend import kernels
from .gates import GateKind, GateOp
from .state import MAX_QUBITS, StateVector

_ANGLES_PER_KIND = {
    GateKind.RX: 1, GateKind.RY: 1, GateKind.RZ: 1, GateKind.U3: 3, GateKind.CNOT: 0,
}


@dataclass(frozen=True)
class Program:
    """Flat array form of a circuit, consumed by the kernels."""

    n_qubits: int
    kinds: np.ndarray
    targets: np.ndarray
    controls: np.ndarray
    base_angles: np.ndarray
    slot_ops: np.ndarray
    slot_angles: np.ndarray

    @property
    def num_slots(self) -> int:
        return self.slot_ops.shape[0]

    def bound_angles(self, params: np.ndarray) -> np.ndarray:
        angles = self.base_angles.copy()
        angles[self.slot_ops, self.slot_angles] = params
        return angles


@dataclass(frozen=True)
class Circuit:
    """Gate sequence on ``n_qubits`` qubits.

    ``param_slots[k]`` is the (op index, angle index) pair bound by the
    k-th trainable parameter when the circuit is run.
    """

    n_qubits: int
    ops: tuple[GateOp, ...]
    param_slots: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigError(
                f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "param_slots", tuple(self.param_slots))
        for op in self.ops:
            if not 0 <= op.target < self.n_qubits:
                raise ConfigError(f"target {op.target} out of range")
            if op.control is not None and not 0 <= op.control < self.n_qubits:
                raise ConfigError(f"control {op.control} out of range")
        for op_idx, angle_idx in self.param_slots:
            if not 0 <= op_idx < len(self.ops):
                raise ConfigError(f"param slot addresses missing op {op_idx}")
            if not 0 <= angle_idx < _ANGLES_PER_KIND[self.ops[op_idx].kind]:
                raise ConfigError(
                    f"param slot addresses angle {angle_idx} of "
                    f"{self.ops[op_idx].kind.name}"
                )

    @property
    def num_params(self) -> int:
        return len(self.param_slots)

    def compile(self) -> Program:
        """Flatten to kernel arrays (cached)."""
        cached = getattr(self, "_program", None)
        if cached is not None:
            return cached
        n = len(self.ops)
        kinds = np.empty(n, dtype=np.int32)
        targets = np.empty(n, dtype=np.int32)
        controls = np.full(n, -1, dtype=np.int32)
        base_angles = np.zeros((n, 3))
        for i, op in enumerate(self.ops):
            kinds[i] = int(op.kind)
            targets[i] = op.target
            if op.control is not None:
                controls[i] = op.control
            for j, a in enumerate(op.params):
                base_angles[i, j] = a
        slot_ops = np.array([s[0] for s in self.param_slots], dtype=np.int32)
        slot_angles = np.array([s[1] for s in self.param_slots], dtype=np.int32)
        program = Program(
            self.n_qubits, kinds, targets, controls, base_angles, slot_ops, slot_angles
        )
        object.__setattr__(self, "_program", program)
        return program


def run_circuit(circuit: Circuit, bound_params=()) -> StateVector:
    """Apply every op in order to |0...0>, trainable slots substituted."""
    bound = np.atleast_1d(np.asarray(bound_params, dtype=np.float64))
    if bound.shape[0] != circuit.num_params:
        raise ValueError(
            f"circuit has {circuit.num_params} trainable slots, "
            f"got {bound.shape[0]} values"
        )
    program = circuit.compile()
    angles = program.bound_angles(bound) if circuit.num_params else program.base_angles
    amps = kernels.run_program(
        program.n_qubits, program.kinds, program.targets, program.controls,
        np.ascontiguousarray(angles),
    )
    return StateVector(circuit.n_qubits, amps)
