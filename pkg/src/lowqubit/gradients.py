"""Gradient engine for circuit parameters.

Main path: the parameter-shift rule, exact for RX/RY/RZ angles (and the
three Euler angles of U3, which decompose into such rotations).  The
central finite-difference oracle exists for verification only and never
backs the production gradients.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import UnsupportedGateError
from .qsim import Circuit, GateKind, expectation_z, run_circuit
from .qsim.backend import kernels

SHIFT = np.pi / 2.0


@dataclass(frozen=True)
class GradVector:
    """One derivative entry per trainable parameter."""

    values: np.ndarray

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=np.float64))
        if not np.all(np.isfinite(values)):
            raise FloatingPointError("gradient contains non-finite entries")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]


def _check_rotation_slots(circuit: Circuit):
    for op_idx, _ in circuit.param_slots:
        if circuit.ops[op_idx].kind == GateKind.CNOT:
            raise UnsupportedGateError(
                f"trainable slot on op {op_idx} ({circuit.ops[op_idx].kind.name}) "
                "is not a rotation angle"
            )


def param_shift_grad(circuit: Circuit, params, observable: int) -> GradVector:
    """d<Z_observable>/d(theta_k) via (E(+pi/2) - E(-pi/2)) / 2 per slot."""
    _check_rotation_slots(circuit)
    params = np.asarray(params, dtype=np.float64)
    if not 0 <= observable < circuit.n_qubits:
        raise IndexError(f"observable qubit {observable} out of range")
    values = np.empty(circuit.num_params)
    for k in range(circuit.num_params):
        shifted = params.copy()
        shifted[k] += SHIFT
        e_plus = expectation_z(run_circuit(circuit, shifted), observable)
        shifted[k] -= 2 * SHIFT
        e_minus = expectation_z(run_circuit(circuit, shifted), observable)
        values[k] = 0.5 * (e_plus - e_minus)
    return GradVector(values)


def param_shift_jacobian(circuit: Circuit, params, p_lo: int = 0,
                         p_hi: int | None = None) -> np.ndarray:
    """d<Z_q>/d(theta_p) for p in [p_lo, p_hi), all qubits at once.

    Returns (p_hi - p_lo, n_qubits).  Used as the batched building block
    for layer backward passes.
    """
    _check_rotation_slots(circuit)
    params = np.asarray(params, dtype=np.float64).reshape(1, -1)
    if p_hi is None:
        p_hi = circuit.num_params
    program = circuit.compile()
    jac = kernels.jacobian_batch(
        program.n_qubits, program.kinds, program.targets, program.controls,
        program.base_angles, program.slot_ops, program.slot_angles,
        np.ascontiguousarray(params), p_lo, p_hi,
    )
    return np.asarray(jac)[0]


def finite_diff_grad(f: Callable[[np.ndarray], float], params, h: float = 1e-4) -> GradVector:
    """Central-difference oracle: (f(x + h e_k) - f(x - h e_k)) / 2h."""
    params = np.asarray(params, dtype=np.float64)
    values = np.empty(params.shape[0])
    for k in range(params.shape[0]):
        shifted = params.copy()
        shifted[k] += h
        f_plus = float(f(shifted))
        shifted[k] -= 2 * h
        f_minus = float(f(shifted))
        values[k] = (f_plus - f_minus) / (2 * h)
    return GradVector(values)


def encoder_chain_grad(x, w_row, circuit_grad_wrt_angle: float, y_pre: float,
                       clip_bounds: tuple[float, float]) -> GradVector:
    """Chain-rule factor through the clipped arctan encoder.

    d<E>/dw_i = circuit_grad * 1/(1 + y^2) * x_i with y the clipped
    pre-activation; exactly zero when the clamp is saturated.
    """
    lo, hi = clip_bounds
    x = np.asarray(x, dtype=np.float64)
    if y_pre < lo or y_pre > hi:
        return GradVector(np.zeros_like(x))
    damping = 1.0 / (1.0 + y_pre * y_pre)
    return GradVector(circuit_grad_wrt_angle * damping * x)
