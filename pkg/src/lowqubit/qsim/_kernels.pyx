# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled statevector kernels.

Hot loops behind circuit execution and parameter-shift Jacobians.  The
pure-numpy twin lives in ``_kernels_py``; both expose the same functions
and the test suite checks them against each other.

Gate kind codes: 0=RX, 1=RY, 2=RZ, 3=U3, 4=CNOT.
"""

import numpy as np

cimport cython
from libc.math cimport cos, sin

ctypedef double complex cplx

BACKEND = "compiled"

cdef double HALF_PI = 1.5707963267948966
cdef double PI = 3.141592653589793


cdef inline void _rot2(int kind, double a1, double a2, double a3, cplx* m) noexcept nogil:
    cdef double c, s, ch, sh
    if kind == 0:  # RX
        c = cos(a1 * 0.5); s = sin(a1 * 0.5)
        m[0] = c; m[1] = -1j * s; m[2] = -1j * s; m[3] = c
    elif kind == 1:  # RY
        c = cos(a1 * 0.5); s = sin(a1 * 0.5)
        m[0] = c; m[1] = -s; m[2] = s; m[3] = c
    elif kind == 2:  # RZ
        ch = cos(a1 * 0.5); sh = sin(a1 * 0.5)
        m[0] = ch - 1j * sh; m[1] = 0; m[2] = 0; m[3] = ch + 1j * sh
    else:  # U3 = RZ(a3) RY(a2) RZ(a1)
        c = cos(a2 * 0.5); s = sin(a2 * 0.5)
        ch = (a1 + a3) * 0.5; sh = (a1 - a3) * 0.5
        m[0] = c * (cos(ch) - 1j * sin(ch))
        m[1] = -s * (cos(sh) + 1j * sin(sh))
        m[2] = s * (cos(sh) - 1j * sin(sh))
        m[3] = c * (cos(ch) + 1j * sin(ch))


cdef inline void _apply_1q(cplx* st, int n_qubits, int target, cplx* m) noexcept nogil:
    cdef Py_ssize_t step = (<Py_ssize_t>1) << target
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t i = 0, j, i0, i1
    cdef cplx a0, a1
    while i < size:
        for j in range(step):
            i0 = i + j
            i1 = i0 + step
            a0 = st[i0]
            a1 = st[i1]
            st[i0] = m[0] * a0 + m[1] * a1
            st[i1] = m[2] * a0 + m[3] * a1
        i += 2 * step


cdef inline void _apply_cnot(cplx* st, int n_qubits, int control, int target) noexcept nogil:
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t cbit = (<Py_ssize_t>1) << control
    cdef Py_ssize_t tbit = (<Py_ssize_t>1) << target
    cdef Py_ssize_t i
    cdef cplx tmp
    for i in range(size):
        if (i & cbit) != 0 and (i & tbit) == 0:
            tmp = st[i]
            st[i] = st[i | tbit]
            st[i | tbit] = tmp


cdef void _run(cplx* st, int n_qubits, Py_ssize_t n_ops, const int* kinds,
               const int* targets, const int* controls, const double* angles) noexcept nogil:
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t i
    cdef cplx m[4]
    for i in range(size):
        st[i] = 0
    st[0] = 1
    for i in range(n_ops):
        if kinds[i] == 4:
            _apply_cnot(st, n_qubits, controls[i], targets[i])
        else:
            _rot2(kinds[i], angles[3 * i], angles[3 * i + 1], angles[3 * i + 2], m)
            _apply_1q(st, n_qubits, targets[i], m)


cdef void _all_z(const cplx* st, int n_qubits, double* out) noexcept nogil:
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t i
    cdef int q
    cdef double p
    for q in range(n_qubits):
        out[q] = 0.0
    for i in range(size):
        p = st[i].real * st[i].real + st[i].imag * st[i].imag
        for q in range(n_qubits):
            if (i >> q) & 1:
                out[q] -= p
            else:
                out[q] += p


cdef inline void _bind(double* angles, const double* base, Py_ssize_t n_ops,
                       const int* slot_ops, const int* slot_angles,
                       const double* values, Py_ssize_t n_slots) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(3 * n_ops):
        angles[i] = base[i]
    for i in range(n_slots):
        angles[3 * slot_ops[i] + slot_angles[i]] = values[i]


def apply_gate_inplace(cplx[::1] amps, int n_qubits, int kind, int target,
                       int control, double a1, double a2, double a3):
    cdef cplx m[4]
    if kind == 4:
        _apply_cnot(&amps[0], n_qubits, control, target)
    else:
        _rot2(kind, a1, a2, a3, m)
        _apply_1q(&amps[0], n_qubits, target, m)


def run_program(int n_qubits, int[::1] kinds, int[::1] targets, int[::1] controls,
                double[:, ::1] angles):
    cdef Py_ssize_t n_ops = kinds.shape[0]
    out = np.empty(1 << n_qubits, dtype=np.complex128)
    cdef cplx[::1] st = out
    cdef const int* kp = NULL
    cdef const int* tp = NULL
    cdef const int* cp = NULL
    cdef const double* ap = NULL
    if n_ops > 0:
        kp = &kinds[0]; tp = &targets[0]; cp = &controls[0]; ap = &angles[0, 0]
    with nogil:
        _run(&st[0], n_qubits, n_ops, kp, tp, cp, ap)
    return out


def expectation_z(const cplx[::1] amps, int n_qubits, int qubit):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t i
    cdef Py_ssize_t qbit = (<Py_ssize_t>1) << qubit
    cdef double acc = 0.0, p
    with nogil:
        for i in range(size):
            p = amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
            if i & qbit:
                acc -= p
            else:
                acc += p
    return acc


def all_expectations_z(const cplx[::1] amps, int n_qubits):
    out = np.empty(n_qubits)
    cdef double[::1] ov = out
    with nogil:
        _all_z(&amps[0], n_qubits, &ov[0])
    return out


def expectations_batch(int n_qubits, int[::1] kinds, int[::1] targets,
                       int[::1] controls, double[:, ::1] base_angles,
                       int[::1] slot_ops, int[::1] slot_angles,
                       double[:, ::1] params):
    cdef Py_ssize_t rows = params.shape[0]
    cdef Py_ssize_t n_slots = params.shape[1]
    cdef Py_ssize_t n_ops = kinds.shape[0]
    out = np.empty((rows, n_qubits))
    state = np.empty(1 << n_qubits, dtype=np.complex128)
    angles = np.empty(3 * n_ops)
    cdef double[:, ::1] ov = out
    cdef cplx[::1] st = state
    cdef double[::1] ang = angles
    cdef Py_ssize_t r
    with nogil:
        for r in range(rows):
            _bind(&ang[0], &base_angles[0, 0], n_ops, &slot_ops[0],
                  &slot_angles[0], &params[r, 0], n_slots)
            _run(&st[0], n_qubits, n_ops, &kinds[0], &targets[0], &controls[0], &ang[0])
            _all_z(&st[0], n_qubits, &ov[r, 0])
    return out


def jacobian_batch(int n_qubits, int[::1] kinds, int[::1] targets,
                   int[::1] controls, double[:, ::1] base_angles,
                   int[::1] slot_ops, int[::1] slot_angles,
                   double[:, ::1] params, Py_ssize_t p_lo, Py_ssize_t p_hi):
    cdef Py_ssize_t rows = params.shape[0]
    cdef Py_ssize_t n_slots = params.shape[1]
    cdef Py_ssize_t n_ops = kinds.shape[0]
    out = np.empty((rows, p_hi - p_lo, n_qubits))
    state = np.empty(1 << n_qubits, dtype=np.complex128)
    angles = np.empty(3 * n_ops)
    values = np.empty(n_slots)
    eplus = np.empty(n_qubits)
    cdef double[:, :, ::1] ov = out
    cdef cplx[::1] st = state
    cdef double[::1] ang = angles
    cdef double[::1] val = values
    cdef double[::1] ep = eplus
    cdef Py_ssize_t r, p, i
    cdef int q
    with nogil:
        for r in range(rows):
            for i in range(n_slots):
                val[i] = params[r, i]
            for p in range(p_lo, p_hi):
                val[p] = params[r, p] + HALF_PI
                _bind(&ang[0], &base_angles[0, 0], n_ops, &slot_ops[0],
                      &slot_angles[0], &val[0], n_slots)
                _run(&st[0], n_qubits, n_ops, &kinds[0], &targets[0],
                     &controls[0], &ang[0])
                _all_z(&st[0], n_qubits, &ep[0])
                val[p] = params[r, p] - HALF_PI
                _bind(&ang[0], &base_angles[0, 0], n_ops, &slot_ops[0],
                      &slot_angles[0], &val[0], n_slots)
                _run(&st[0], n_qubits, n_ops, &kinds[0], &targets[0],
                     &controls[0], &ang[0])
                _all_z(&st[0], n_qubits, &ov[r, p - p_lo, 0])
                for q in range(n_qubits):
                    ov[r, p - p_lo, q] = 0.5 * (ep[q] - ov[r, p - p_lo, q])
                val[p] = params[r, p]
    return out
