"""State vectors and single-gate operations.

Amplitudes are indexed little-endian: qubit 0 is the least significant
bit of the basis index, so |q_n-1 ... q_1 q_0> sits at index
sum(q_i << i).
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .backend import kernels
from .gates import GateKind, GateOp

MAX_QUBITS = 12


@dataclass(frozen=True)
class StateVector:
    """Immutable amplitude vector of an n-qubit register."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigError(
                f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"amplitude vector must have length {1 << self.n_qubits}, "
                f"got {amps.shape}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def zero_state(n_qubits: int) -> StateVector:
    """|0...0> on ``n_qubits`` qubits."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def _check_qubit(index: int, n_qubits: int, what: str):
    if not 0 <= index < n_qubits:
        raise IndexError(f"{what} qubit {index} out of range for {n_qubits} qubits")


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Apply one gate, returning a new state (the input is untouched)."""
    _check_qubit(gate.target, state.n_qubits, "target")
    if gate.kind == GateKind.CNOT:
        _check_qubit(gate.control, state.n_qubits, "control")
    amps = state.amps.copy()
    p = gate.params
    kernels.apply_gate_inplace(
        amps, state.n_qubits, int(gate.kind), gate.target,
        -1 if gate.control is None else gate.control,
        p[0] if len(p) > 0 else 0.0,
        p[1] if len(p) > 1 else 0.0,
        p[2] if len(p) > 2 else 0.0,
    )
    return StateVector(state.n_qubits, amps)


def expectation_z(state: StateVector, qubit: int) -> float:
    """Exact <psi|Z_qubit|psi>, always in [-1, 1]."""
    _check_qubit(qubit, state.n_qubits, "measured")
    return float(kernels.expectation_z(state.amps, state.n_qubits, qubit))


def all_expectations_z(state: StateVector) -> np.ndarray:
    """Per-qubit <Z> as a length-n_qubits float vector."""
    return np.asarray(kernels.all_expectations_z(state.amps, state.n_qubits))
