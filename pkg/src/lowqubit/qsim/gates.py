"""Gate definitions: kinds, per-gate validation and dense matrices.

Qubit ordering is little-endian everywhere: qubit 0 is the least
significant bit of the amplitude index.
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..errors import ConfigError


class GateKind(IntEnum):
    RX = 0
    RY = 1
    RZ = 2
    U3 = 3
    CNOT = 4


_N_PARAMS = {GateKind.RX: 1, GateKind.RY: 1, GateKind.RZ: 1, GateKind.U3: 3, GateKind.CNOT: 0}


def rotation_matrix(kind: GateKind, params) -> np.ndarray:
    """Dense 2x2 matrix of a single-qubit rotation.

    U3(t1, t2, t3) is the Euler form RZ(t3) @ RY(t2) @ RZ(t1).
    """
    if kind == GateKind.RX:
        c, s = np.cos(params[0] / 2), np.sin(params[0] / 2)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind == GateKind.RY:
        c, s = np.cos(params[0] / 2), np.sin(params[0] / 2)
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == GateKind.RZ:
        e = np.exp(-0.5j * params[0])
        return np.array([[e, 0.0], [0.0, np.conj(e)]], dtype=np.complex128)
    if kind == GateKind.U3:
        t1, t2, t3 = params
        rz1 = rotation_matrix(GateKind.RZ, (t1,))
        ry = rotation_matrix(GateKind.RY, (t2,))
        rz3 = rotation_matrix(GateKind.RZ, (t3,))
        return rz3 @ ry @ rz1
    raise ValueError(f"{kind.name} is not a single-qubit rotation")


# CNOT in the basis |control, target> (control is the high bit of the pair).
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)


@dataclass(frozen=True)
class GateOp:
    """One gate in a circuit: a parameterized rotation or a CNOT."""

    kind: GateKind
    target: int
    control: int | None = None
    params: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        want = _N_PARAMS[self.kind]
        if len(self.params) != want:
            raise ConfigError(
                f"{self.kind.name} takes {want} angle(s), got {len(self.params)}"
            )
        if self.kind == GateKind.CNOT:
            if self.control is None:
                raise ConfigError("CNOT requires a control qubit")
            if self.control == self.target:
                raise ConfigError("CNOT control and target must differ")
        elif self.control is not None:
            raise ConfigError(f"{self.kind.name} takes no control qubit")

    def matrix(self) -> np.ndarray:
        """Dense unitary of this gate (2x2, or 4x4 for CNOT)."""
        if self.kind == GateKind.CNOT:
            return CNOT_MATRIX.copy()
        return rotation_matrix(self.kind, self.params)

    def with_params(self, params: tuple[float, ...]) -> "GateOp":
        return GateOp(self.kind, self.target, self.control, params)


def rx(target: int, angle: float) -> GateOp:
    return GateOp(GateKind.RX, target, params=(angle,))


def ry(target: int, angle: float) -> GateOp:
    return GateOp(GateKind.RY, target, params=(angle,))


def rz(target: int, angle: float) -> GateOp:
    return GateOp(GateKind.RZ, target, params=(angle,))


def u3(target: int, t1: float, t2: float, t3: float) -> GateOp:
    return GateOp(GateKind.U3, target, params=(t1, t2, t3))


def cnot(control: int, target: int) -> GateOp:
    return GateOp(GateKind.CNOT, target, control=control)
