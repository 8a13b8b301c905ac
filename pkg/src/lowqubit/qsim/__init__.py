"""Exact statevector simulation of small (<= 12 qubit) circuits."""

from .backend import backend_name, compiled_kernels_available
from .circuit import Circuit, Program, run_circuit
from .gates import GateKind, GateOp, cnot, rotation_matrix, rx, ry, rz, u3
from .state import (
    MAX_QUBITS,
    StateVector,
    all_expectations_z,
    apply_gate,
    expectation_z,
    zero_state,
)

__all__ = [
    "MAX_QUBITS",
    "Circuit",
    "GateKind",
    "GateOp",
    "Program",
    "StateVector",
    "all_expectations_z",
    "apply_gate",
    "backend_name",
    "cnot",
    "compiled_kernels_available",
    "expectation_z",
    "rotation_matrix",
    "run_circuit",
    "rx",
    "ry",
    "rz",
    "u3",
    "zero_state",
]
