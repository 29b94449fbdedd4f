"""Fixed gate matrices and named Weyl-chamber points.

Conventions used everywhere in this package:

* basis order |00>, |01>, |10>, |11>, first label = qubit 0 (left tensor
  factor),
* hbar = 1, evolution U = exp(-i H t),
* canonical coordinates in radians; ``canonical(c1, c2, c3)`` below is
  exp(-i/2 (c1 XX + c2 YY + c3 ZZ)) and maps back to (c1, c2, c3).
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "I2", "X", "Y", "Z", "MAGIC",
    "XX", "YY", "ZZ",
    "I4", "CNOT", "CZ", "SWAP", "ISWAP",
    "rz", "sx", "h", "u3", "rzz", "canonical", "kron2",
    "WEYL_IDENTITY", "WEYL_CNOT", "WEYL_ISWAP", "WEYL_SWAP", "WEYL_B",
    "WEYL_SQISWAP", "WEYL_SQCNOT", "WEYL_SQB", "NAMED_POINTS",
]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)

# Magic (Bell) basis change, Makhlin's Q.
MAGIC = np.array(
    [[1, 0, 0, 1j],
     [0, 1j, 1, 0],
     [0, 1j, -1, 0],
     [1, 0, 0, -1j]],
    dtype=complex,
) / np.sqrt(2.0)

I4 = np.eye(4, dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
ISWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def sx() -> np.ndarray:
    return 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])


def h() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    """General single-qubit rotation, OpenQASM u3 convention."""
    ct, st = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array(
        [[ct, -np.exp(1j * lam) * st],
         [np.exp(1j * phi) * st, np.exp(1j * (phi + lam)) * ct]]
    )


def rzz(theta: float) -> np.ndarray:
    e = np.exp(-0.5j * theta)
    return np.diag([e, e.conjugate(), e.conjugate(), e]).astype(complex)


def canonical(c1: float, c2: float, c3: float) -> np.ndarray:
    """Canonical gate exp(-i/2 (c1 XX + c2 YY + c3 ZZ)).

    XX, YY, ZZ commute, so the exponential factorizes exactly.
    """
    u = I4
    for c, p in ((c1, XX), (c2, YY), (c3, ZZ)):
        u = (np.cos(c / 2.0) * I4 - 1j * np.sin(c / 2.0) * p) @ u
    return u


def kron2(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Two-qubit local gate u1 (qubit 0) x u2 (qubit 1)."""
    return np.kron(u1, u2)


PI = np.pi
WEYL_IDENTITY = (0.0, 0.0, 0.0)
WEYL_CNOT = (PI / 2, 0.0, 0.0)
WEYL_ISWAP = (PI / 2, PI / 2, 0.0)
WEYL_SWAP = (PI / 2, PI / 2, PI / 2)
WEYL_B = (PI / 2, PI / 4, 0.0)
WEYL_SQISWAP = (PI / 4, PI / 4, 0.0)
WEYL_SQCNOT = (PI / 4, 0.0, 0.0)
WEYL_SQB = (PI / 4, PI / 8, 0.0)

NAMED_POINTS = {
    "identity": WEYL_IDENTITY,
    "cnot": WEYL_CNOT,
    "iswap": WEYL_ISWAP,
    "swap": WEYL_SWAP,
    "b": WEYL_B,
    "sqiswap": WEYL_SQISWAP,
    "sqcnot": WEYL_SQCNOT,
    "sqb": WEYL_SQB,
}
