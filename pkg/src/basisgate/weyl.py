"""Local-invariant arithmetic for two-qubit gates.

Makhlin invariants, canonical Weyl-chamber coordinates, Haar sampling and
the invariant-distance loss used by the template optimizer.

Coordinates live in the standard chamber

    0 <= c3 <= c2 <= min(c1, pi - c1),   c1 in [0, pi],

in radians, so CNOT = (pi/2, 0, 0), iSWAP = (pi/2, pi/2, 0), SWAP =
(pi/2, pi/2, pi/2) and B = (pi/2, pi/4, 0).  On the chamber floor
(c3 = 0) a class has two mirror representatives; we deterministically
resolve those to the left half (c1 <= pi/2).

The coordinate extraction follows Childs et al., PRA 68, 052311 (2003);
invariants follow Makhlin, QIP 1, 243 (2002).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import NonUnitaryInput
from .gates import MAGIC, Y, canonical

__all__ = [
    "WeylPoint",
    "MakhlinInvariants",
    "assert_unitary",
    "is_unitary",
    "makhlin_invariants",
    "makhlin_invariants_batch",
    "invariants_from_coordinate",
    "canonical_coordinate",
    "canonical_coordinates_batch",
    "haar_random_unitary4",
    "haar_random_unitary4_batch",
    "haar_random_local",
    "makhlin_loss",
    "coordinate_distance",
    "in_weyl_chamber",
]

_YY = np.kron(Y, Y)
_PAIR_SUM = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
# Tolerance below which c3 counts as "on the chamber floor" for the
# left-half mirror tie-break.
_FLOOR_TOL = 1e-7


class MakhlinInvariants(NamedTuple):
    """Local invariants (Re g1, Im g1, g2) of a two-qubit gate."""

    g1_re: float
    g1_im: float
    g2: float

    def as_array(self) -> np.ndarray:
        return np.asarray(self, dtype=float)


@dataclass(frozen=True)
class WeylPoint:
    """Canonical coordinate (c1, c2, c3) of a local-equivalence class."""

    c1: float
    c2: float
    c3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])

    def mirror(self) -> "WeylPoint":
        """The conjugate class c1 -> pi - c1 (left-resolved on the floor)."""
        c1 = np.pi - self.c1
        if self.c3 <= _FLOOR_TOL and c1 > np.pi / 2:
            c1 = np.pi - c1
        return WeylPoint(c1, self.c2, self.c3)


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.shape[-2:] != (u.shape[-1], u.shape[-1]):
        return False
    eye = np.eye(u.shape[-1])
    return bool(
        np.linalg.norm(u @ np.conj(np.swapaxes(u, -1, -2)) - eye, axis=(-2, -1)).max()
        <= tol
    )


def assert_unitary(u: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, tol):
        raise NonUnitaryInput(f"matrix is not unitary within {tol:g}")
    return u


def makhlin_invariants(u: np.ndarray) -> MakhlinInvariants:
    """Local invariants via the magic-basis Gram matrix.

    m = (Q^d u Q)^T (Q^d u Q), g1 = tr(m)^2 / (16 det u) and
    g2 = (tr(m)^2 - tr(m^2)) / (4 det u).
    """
    u = assert_unitary(u)
    return MakhlinInvariants(*makhlin_invariants_batch(u[None, :, :])[0])


def makhlin_invariants_batch(us: np.ndarray) -> np.ndarray:
    """Vectorized invariants; us has shape (..., 4, 4), result (..., 3)."""
    m4 = np.conj(MAGIC.T) @ us @ MAGIC
    # det computed in the rotated frame for a little extra accuracy
    det = np.linalg.det(m4)
    m = np.swapaxes(m4, -1, -2) @ m4
    tr = np.trace(m, axis1=-2, axis2=-1)
    tr2 = np.trace(m @ m, axis1=-2, axis2=-1)
    g1 = tr**2 / (16.0 * det)
    g2 = (tr**2 - tr2) / (4.0 * det)
    return np.stack([g1.real, g1.imag, g2.real], axis=-1)


def invariants_from_coordinate(c: np.ndarray) -> np.ndarray:
    """Closed-form invariants of a canonical coordinate (..., 3) -> (..., 3).

    Zhang et al., PRA 67, 042313 (2003), Eq. (28)-(30); the sign of
    Im(g1) follows this package's exp(-i/2 c.Sigma) convention.
    """
    c = np.asarray(c, dtype=float)
    c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2]
    g1 = (
        np.cos(c1) ** 2 * np.cos(c2) ** 2 * np.cos(c3) ** 2
        - np.sin(c1) ** 2 * np.sin(c2) ** 2 * np.sin(c3) ** 2
    )
    g1_im = -0.25 * np.sin(2 * c1) * np.sin(2 * c2) * np.sin(2 * c3)
    g2 = 4 * g1 - np.cos(2 * c1) * np.cos(2 * c2) * np.cos(2 * c3)
    return np.stack([g1, g1_im, g2], axis=-1)


def canonical_coordinate(u: np.ndarray) -> WeylPoint:
    """Canonical chamber coordinate of a two-qubit unitary."""
    u = assert_unitary(u)
    c = canonical_coordinates_batch(u[None, :, :])[0]
    return WeylPoint(*c)


def canonical_coordinates_batch(us: np.ndarray) -> np.ndarray:
    """Vectorized coordinates; us has shape (n, 4, 4), result (n, 3).

    Spectral method: the eigenphases of u (Y x Y) u^T (Y x Y), halved and
    brought to the standard branch, are pairwise sums of the coordinates.
    The conjugation fixes the sign convention so that
    canonical(c1, c2, c3) maps back to (c1, c2, c3).
    """
    us = np.conj(np.asarray(us, dtype=complex))
    ut = _YY @ np.swapaxes(us, -1, -2) @ _YY
    det = np.linalg.det(us)
    ev = np.linalg.eigvals(us @ ut / np.lib.scimath.sqrt(det)[..., None, None])
    two_s = np.angle(ev) / np.pi
    two_s = np.where(two_s <= -0.5, two_s + 2.0, two_s)
    s = -np.sort(-(two_s / 2.0), axis=-1)
    n = np.rint(s.sum(axis=-1)).astype(int)
    s = s - (np.arange(4)[None, :] < n[:, None])
    roll = (np.arange(4)[None, :] + n[:, None]) % 4
    s = np.take_along_axis(s, roll, axis=-1)
    c = s[:, :3] @ _PAIR_SUM.T
    neg = c[:, 2] < 0
    c[neg, 0] = 1.0 - c[neg, 0]
    c[neg, 2] = -c[neg, 2]
    c *= np.pi
    # floor classes are mirror symmetric: resolve to the left half
    tie = (c[:, 2] <= _FLOOR_TOL) & (c[:, 0] > np.pi / 2)
    c[tie, 0] = np.pi - c[tie, 0]
    # clip tiny negative noise
    np.clip(c, 0.0, np.pi, out=c)
    return c


def in_weyl_chamber(c: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Membership test for the fundamental domain (broadcasts over rows)."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    c1, c2, c3 = c[:, 0], c[:, 1], c[:, 2]
    ok = (
        (c1 >= -tol)
        & (c1 <= np.pi + tol)
        & (c3 >= -tol)
        & (c3 <= c2 + tol)
        & (c2 <= np.minimum(c1, np.pi - c1) + tol)
    )
    return ok if ok.size > 1 else bool(ok[0])


def haar_random_unitary4(rng: np.random.Generator) -> np.ndarray:
    """One Haar-distributed U(4) sample (Ginibre + phase-fixed QR)."""
    return haar_random_unitary4_batch(rng, 1)[0]


def haar_random_unitary4_batch(rng: np.random.Generator, n: int) -> np.ndarray:
    return _haar_batch(rng, 4, n)


def haar_random_local(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A pair of independent Haar-random U(2) factors."""
    pair = _haar_batch(rng, 2, 2)
    return pair[0], pair[1]


def _haar_batch(rng: np.random.Generator, dim: int, n: int) -> np.ndarray:
    z = rng.normal(size=(n, dim, dim)) + 1j * rng.normal(size=(n, dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def makhlin_loss(u: np.ndarray, target: MakhlinInvariants | np.ndarray) -> float:
    """Squared Euclidean distance between u's invariants and the target's.

    Zero exactly when u is locally equivalent to the target class.
    """
    g = makhlin_invariants(u).as_array()
    return float(np.sum((g - np.asarray(target, dtype=float)) ** 2))


def coordinate_distance(a: WeylPoint | np.ndarray, b: WeylPoint | np.ndarray) -> float:
    av = a.as_array() if isinstance(a, WeylPoint) else np.asarray(a, dtype=float)
    bv = b.as_array() if isinstance(b, WeylPoint) else np.asarray(b, dtype=float)
    return float(np.linalg.norm(av - bv))


# re-export for callers that build canonical gates from points
canonical_gate = canonical
