"""Pure-numpy statevector kernels.

Fallback used when the compiled extension is unavailable (or forced via
LOWQUBIT_PURE_PYTHON=1).  Same call signatures as ``_kernels``; the
compiled module is tested against this one.

Gate kind codes match :class:`lowqubit.qsim.gates.GateKind`:
0=RX, 1=RY, 2=RZ, 3=U3, 4=CNOT.
"""

import numpy as np

BACKEND = "python"

_HALF_PI = np.pi / 2.0


def _rot2(kind: int, a1: float, a2: float, a3: float) -> np.ndarray:
    if kind == 0:  # RX
        c, s = np.cos(a1 / 2), np.sin(a1 / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == 1:  # RY
        c, s = np.cos(a1 / 2), np.sin(a1 / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == 2:  # RZ
        e = np.exp(-0.5j * a1)
        return np.array([[e, 0], [0, np.conj(e)]])
    if kind == 3:  # U3 = RZ(a3) RY(a2) RZ(a1)
        c, s = np.cos(a2 / 2), np.sin(a2 / 2)
        return np.array(
            [
                [c * np.exp(-0.5j * (a1 + a3)), -s * np.exp(0.5j * (a1 - a3))],
                [s * np.exp(-0.5j * (a1 - a3)), c * np.exp(0.5j * (a1 + a3))],
            ]
        )
    raise ValueError(f"not a rotation kind: {kind}")


def apply_gate_inplace(amps, n_qubits, kind, target, control, a1, a2, a3):
    """Apply one gate to the amplitude vector, mutating it."""
    if kind == 4:
        idx = np.arange(amps.shape[0])
        src = np.nonzero(((idx >> control) & 1) == 1)[0]
        amps[src] = amps[src ^ (1 << target)]
        return
    m = _rot2(kind, a1, a2, a3)
    view = amps.reshape(1 << (n_qubits - target - 1), 2, 1 << target)
    a0 = view[:, 0, :].copy()
    a1v = view[:, 1, :]
    view[:, 0, :] = m[0, 0] * a0 + m[0, 1] * a1v
    view[:, 1, :] = m[1, 0] * a0 + m[1, 1] * a1v


def run_program(n_qubits, kinds, targets, controls, angles):
    """Run a gate sequence on |0..0> and return the final amplitudes."""
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    for i in range(len(kinds)):
        apply_gate_inplace(
            amps, n_qubits, kinds[i], targets[i], controls[i],
            angles[i, 0], angles[i, 1], angles[i, 2],
        )
    return amps


def expectation_z(amps, n_qubits, qubit):
    probs = np.abs(amps) ** 2
    signs = 1.0 - 2.0 * ((np.arange(probs.shape[0]) >> qubit) & 1)
    return float(np.dot(signs, probs))


def all_expectations_z(amps, n_qubits):
    probs = np.abs(amps) ** 2
    idx = np.arange(probs.shape[0])
    out = np.empty(n_qubits)
    for q in range(n_qubits):
        signs = 1.0 - 2.0 * ((idx >> q) & 1)
        out[q] = np.dot(signs, probs)
    return out


def _bound_angles(base_angles, slot_ops, slot_angles, values):
    angles = base_angles.copy()
    angles[slot_ops, slot_angles] = values
    return angles


def expectations_batch(n_qubits, kinds, targets, controls, base_angles,
                       slot_ops, slot_angles, params):
    """Per-qubit <Z> for each row of bound parameters.

    ``params`` is (rows, n_slots); returns (rows, n_qubits).
    """
    rows = params.shape[0]
    out = np.empty((rows, n_qubits))
    for r in range(rows):
        angles = _bound_angles(base_angles, slot_ops, slot_angles, params[r])
        amps = run_program(n_qubits, kinds, targets, controls, angles)
        out[r] = all_expectations_z(amps, n_qubits)
    return out


def jacobian_batch(n_qubits, kinds, targets, controls, base_angles,
                   slot_ops, slot_angles, params, p_lo, p_hi):
    """Parameter-shift Jacobian d<Z_q>/d(param_p) for p in [p_lo, p_hi).

    Returns (rows, p_hi - p_lo, n_qubits).
    """
    rows = params.shape[0]
    out = np.empty((rows, p_hi - p_lo, n_qubits))
    for r in range(rows):
        for p in range(p_lo, p_hi):
            shifted = params[r].copy()
            shifted[p] += _HALF_PI
            angles = _bound_angles(base_angles, slot_ops, slot_angles, shifted)
            e_plus = all_expectations_z(
                run_program(n_qubits, kinds, targets, controls, angles), n_qubits
            )
            shifted[p] -= np.pi
            angles = _bound_angles(base_angles, slot_ops, slot_angles, shifted)
            e_minus = all_expectations_z(
                run_program(n_qubits, kinds, targets, controls, angles), n_qubits
            )
            out[r, p - p_lo] = 0.5 * (e_plus - e_minus)
    return out
