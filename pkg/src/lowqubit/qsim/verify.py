"""Simulator property checks and the dense-matrix reference oracle.

The oracle builds every gate as a full 2^n x 2^n matrix and multiplies
them out with plain numpy, taking a completely different code path from
the kernels it cross-checks.
"""

import time
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, run_circuit
from .gates import CNOT_MATRIX, GateKind, GateOp, rotation_matrix
from .state import apply_gate, expectation_z, zero_state

_P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
_P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def embed_1q(matrix: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Lift a 2x2 operator on ``qubit`` to the full register (little-endian)."""
    full = np.eye(1 << qubit, dtype=np.complex128)
    full = np.kron(matrix, full)
    return np.kron(np.eye(1 << (n_qubits - qubit - 1), dtype=np.complex128), full)


def gate_matrix_full(op: GateOp, n_qubits: int) -> np.ndarray:
    """Full-register dense unitary of one gate."""
    if op.kind == GateKind.CNOT:
        return (
            embed_1q(_P0, op.control, n_qubits)
            + embed_1q(_P1, op.control, n_qubits) @ embed_1q(_X, op.target, n_qubits)
        )
    return embed_1q(rotation_matrix(op.kind, op.params), op.target, n_qubits)


def dense_oracle_state(circuit: Circuit, bound_params=()) -> np.ndarray:
    """Final state via explicit dense matrix products (reference path)."""
    program = circuit.compile()
    angles = (
        program.bound_angles(np.asarray(bound_params, dtype=np.float64))
        if circuit.num_params
        else program.base_angles
    )
    state = np.zeros(1 << circuit.n_qubits, dtype=np.complex128)
    state[0] = 1.0
    for i, op in enumerate(circuit.ops):
        bound = op if op.kind == GateKind.CNOT else op.with_params(tuple(angles[i, : len(op.params)]))
        state = gate_matrix_full(bound, circuit.n_qubits) @ state
    return state


def random_circuit(rng: np.random.Generator, n_qubits: int, n_gates: int) -> Circuit:
    """Random mix of rotations and CNOTs; every rotation angle is a slot-free literal."""
    ops = []
    kinds = [GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.U3]
    if n_qubits >= 2:
        kinds = kinds + [GateKind.CNOT]
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        target = int(rng.integers(n_qubits))
        if kind == GateKind.CNOT:
            control = int(rng.integers(n_qubits - 1))
            if control >= target:
                control += 1
            ops.append(GateOp(kind, target, control=control))
        elif kind == GateKind.U3:
            ops.append(GateOp(kind, target, params=tuple(rng.uniform(-np.pi, np.pi, 3))))
        else:
            ops.append(GateOp(kind, target, params=(float(rng.uniform(-np.pi, np.pi)),)))
    return Circuit(n_qubits, tuple(ops))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail}"


def check_unitarity(seed: int = 0, trials: int = 50, corrupt: bool = False) -> CheckResult:
    """Every gate matrix G satisfies max|G^H G - I| < 1e-12."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        for kind in (GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.U3):
            n = 3 if kind == GateKind.U3 else 1
            m = rotation_matrix(kind, rng.uniform(-2 * np.pi, 2 * np.pi, n))
            if corrupt:
                m = m + 1e-6
            worst = max(worst, float(np.max(np.abs(m.conj().T @ m - np.eye(2)))))
    worst = max(
        worst, float(np.max(np.abs(CNOT_MATRIX.conj().T @ CNOT_MATRIX - np.eye(4))))
    )
    return CheckResult("unitarity", worst < 1e-12, f"max |U^H U - I| = {worst:.3e}")


def check_norm_conservation(seed: int = 0, circuits: int = 50, max_qubits: int = 6) -> CheckResult:
    """Norm stays within 1e-12 of 1 after every single gate application."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(circuits):
        n = int(rng.integers(1, max_qubits + 1))
        state = zero_state(n)
        for op in random_circuit(rng, n, 20).ops:
            state = apply_gate(state, op)
            worst = max(worst, abs(state.norm() - 1.0))
    return CheckResult("norm-conservation", worst < 1e-12, f"max |norm - 1| = {worst:.3e}")


def check_oracle_equivalence(seed: int = 0, circuits: int = 500) -> CheckResult:
    """run_circuit matches the dense-matrix oracle within 1e-12 per amplitude."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(circuits):
        n = int(rng.integers(1, 5))
        c = random_circuit(rng, n, int(rng.integers(1, 21)))
        fast = run_circuit(c).amps
        slow = dense_oracle_state(c)
        worst = max(worst, float(np.max(np.abs(fast - slow))))
    elapsed = time.perf_counter() - start
    return CheckResult(
        "oracle-equivalence",
        worst < 1e-12,
        f"{circuits} circuits, max amplitude error = {worst:.3e}, {elapsed:.2f}s",
    )


def check_ry_expectation(grid: int = 100) -> CheckResult:
    """<Z> after RY(theta)|0> equals cos(theta) on a theta grid."""
    worst = 0.0
    for theta in np.linspace(-2 * np.pi, 2 * np.pi, grid):
        state = apply_gate(zero_state(1), GateOp(GateKind.RY, 0, params=(float(theta),)))
        worst = max(worst, abs(expectation_z(state, 0) - np.cos(theta)))
    return CheckResult("ry-expectation", worst < 1e-12, f"max |<Z> - cos| = {worst:.3e}")


def check_cnot_self_inverse(seed: int = 0, trials: int = 50) -> CheckResult:
    """Applying CNOT twice restores the state bit-exactly (tolerance 1e-15)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        state = run_circuit(random_circuit(rng, n, 10))
        control = int(rng.integers(n - 1))
        target = (control + 1) % n
        op = GateOp(GateKind.CNOT, target, control=control)
        twice = apply_gate(apply_gate(state, op), op)
        worst = max(worst, float(np.max(np.abs(twice.amps - state.amps))))
    return CheckResult("cnot-self-inverse", worst <= 1e-15, f"max drift = {worst:.3e}")


def run_all_checks(seed: int = 0, oracle_circuits: int = 500, max_qubits: int = 6,
                   corrupt_gate: bool = False) -> list[CheckResult]:
    return [
        check_unitarity(seed, corrupt=corrupt_gate),
        check_norm_conservation(seed, max_qubits=max_qubits),
        check_oracle_equivalence(seed, circuits=oracle_circuits),
        check_ry_expectation(),
        check_cnot_self_inverse(seed),
    ]
