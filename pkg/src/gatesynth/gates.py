"""Ideal target unitaries on the relabeled qubit register.

Single-transmon gates are 4x4 on the (Q1, Q2) register, two-transmon gates
are 16x16 on (t1 Q1, t1 Q2, t2 Q1, t2 Q2). Rotation convention:
X(pi/2) = exp(+i pi/4 sigma_x), and the same +i sign for Y and Z rotations.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .device import PAULI, BasisMap, relabel_map
from .errors import InvalidInputError


class GateName(str, Enum):
    X90_Q1 = "X90_Q1"
    X90_Q2 = "X90_Q2"
    Y90_Q2 = "Y90_Q2"
    Z90_Q1 = "Z90_Q1"
    Z90_Q2 = "Z90_Q2"
    ISWAP = "ISWAP"
    SQRT_ISWAP = "SQRT_ISWAP"
    DOUBLE_ISWAP = "DOUBLE_ISWAP"
    CZ = "CZ"
    CX = "CX"
    CCCZ = "CCCZ"
    CCCX = "CCCX"
    IDENTITY = "IDENTITY"


TWO_TRANSMON_GATES = frozenset(
    {GateName.CZ, GateName.CX, GateName.CCCZ, GateName.CCCX}
)


@dataclass(frozen=True)
class GateTarget:
    """An ideal unitary with its register embedding."""

    name: str
    ideal: np.ndarray
    embedding: BasisMap

    @property
    def dimension(self) -> int:
        return self.ideal.shape[0]


def _rot90(pauli: str) -> np.ndarray:
    # exp(+i pi/4 sigma) = (1 + i sigma)/sqrt(2)
    return (np.eye(2, dtype=complex) + 1j * PAULI[pauli]) / np.sqrt(2.0)


def _exp_plus_i(generator: np.ndarray) -> np.ndarray:
    """exp(+i G) for real symmetric G, by eigendecomposition."""
    w, v = np.linalg.eigh(generator)
    return (v * np.exp(1j * w)[np.newaxis, :]) @ v.conj().T


def _transition(dim: int, m: int, n: int) -> np.ndarray:
    g = np.zeros((dim, dim))
    g[m, n] = g[n, m] = 1.0
    return g


def _iswap_power(angle: float) -> np.ndarray:
    # exp(i*angle*(XX+YY)/2) acts on the |01>,|10> block only
    u = np.eye(4, dtype=complex)
    u[1, 1] = u[2, 2] = np.cos(angle)
    u[1, 2] = u[2, 1] = 1j * np.sin(angle)
    return u


def double_iswap_target() -> GateTarget:
    """Three-tone entangler sending every register state to a Bell pair.

    Defined as the simultaneous exponential of the three ladder-transition
    generators, U = exp(i*(alpha*(G01 + G23) + beta*G12)) with beta = pi/2
    (a half rotation on the middle transition) and alpha = pi*sqrt(15)/4,
    the smallest outer weight for which sqrt(alpha^2 + (beta/2)^2) is a full
    pi turn; at exactly these weights each column lands on a two-component
    Bell pair over {|00>,|11>} or {|01>,|10>} with amplitudes 1/sqrt(2).
    """
    alpha = np.pi * np.sqrt(15.0) / 4.0
    beta = np.pi / 2.0
    gen = alpha * (_transition(4, 0, 1) + _transition(4, 2, 3)) + beta * _transition(4, 1, 2)
    ideal = _exp_plus_i(gen)
    ideal[np.abs(ideal) < 1e-15] = 0.0
    return GateTarget(
        name=GateName.DOUBLE_ISWAP.value, ideal=ideal, embedding=relabel_map(1)
    )


def _controlled(dim_bits: int, action: np.ndarray, control_bits: tuple[int, ...], target_bit: int) -> np.ndarray:
    """Unitary applying `action` to `target_bit` when all `control_bits` are 1.

    Bit 0 is the least significant register bit (rightmost in the bitstring).
    """
    dim = 2**dim_bits
    u = np.eye(dim, dtype=complex)
    for k in range(dim):
        if all((k >> b) & 1 for b in control_bits) and not (k >> target_bit) & 1:
            k1 = k | (1 << target_bit)
            u[k, k] = action[0, 0]
            u[k1, k1] = action[1, 1]
            u[k, k1] = action[0, 1]
            u[k1, k] = action[1, 0]
    return u


def build_gate(name: GateName | str) -> GateTarget:
    """Ideal unitary for a named gate, with its register embedding.

    4x4 targets live on one transmon's (Q1, Q2) register; CZ/CX/CCCZ/CCCX are
    16x16 with the controlled action between the two Q2 qubits (transmon-1 Q2
    controls, transmon-2 Q2 is the target; both Q1 qubits are spectators, and
    the triple-controlled gates condition on all other three qubits).
    """
    try:
        name = GateName(name)
    except ValueError:
        raise InvalidInputError(f"unknown gate name {name!r}") from None
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    if name is GateName.IDENTITY:
        ideal = np.eye(4, dtype=complex)
    elif name is GateName.X90_Q1:
        ideal = np.kron(_rot90("X"), np.eye(2))
    elif name is GateName.X90_Q2:
        ideal = np.kron(np.eye(2), _rot90("X"))
    elif name is GateName.Y90_Q2:
        ideal = np.kron(np.eye(2), _rot90("Y"))
    elif name is GateName.Z90_Q1:
        ideal = np.kron(_rot90("Z"), np.eye(2))
    elif name is GateName.Z90_Q2:
        ideal = np.kron(np.eye(2), _rot90("Z"))
    elif name is GateName.ISWAP:
        ideal = _iswap_power(np.pi / 2)
    elif name is GateName.SQRT_ISWAP:
        ideal = _iswap_power(np.pi / 4)
    elif name is GateName.DOUBLE_ISWAP:
        return double_iswap_target()
    elif name is GateName.CZ:
        # -1 wherever both Q2 qubits are excited; bits (q1 q2 q3 q4) from msb
        diag = np.ones(16, dtype=complex)
        for k in range(16):
            if (k >> 2) & 1 and k & 1:
                diag[k] = -1.0
        ideal = np.diag(diag)
    elif name is GateName.CX:
        ideal = _controlled(4, x, control_bits=(2,), target_bit=0)
    elif name is GateName.CCCZ:
        ideal = np.eye(16, dtype=complex)
        ideal[15, 15] = -1.0
    elif name is GateName.CCCX:
        ideal = _controlled(4, x, control_bits=(3, 2, 1), target_bit=0)
    else:  # pragma: no cover
        raise InvalidInputError(f"unhandled gate {name!r}")
    n_transmons = 2 if name in TWO_TRANSMON_GATES else 1
    return GateTarget(name=name.value, ideal=ideal, embedding=relabel_map(n_transmons))


def write_gate_csv(path, target: GateTarget) -> None:
    """Write a gate matrix as CSV rows (row, col, re, im)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im"])
        for r in range(target.dimension):
            for c in range(target.dimension):
                z = target.ideal[r, c]
                writer.writerow([r, c, repr(float(z.real)), repr(float(z.imag))])
