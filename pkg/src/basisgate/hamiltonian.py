"""Two-qubit unitaries generated by a driven conversion-gain coupler.

The coupler Hamiltonian is

    H = g_c (e^{i phi_c} a+ b + e^{-i phi_c} a b+)
      + g_g (e^{i phi_g} a b + e^{-i phi_g} a+ b+),

with a, b the qubit lowering operators (a on qubit 0, basis order
|00>, |01>, |10>, |11>).  The conversion term couples {|01>, |10>},
the gain term couples {|00>, |11>}, so the undriven evolution has an
exact two-block closed form.  Adding per-qubit X drives

    + eps1(t) (a + a+) + eps2(t) (b + b+)

couples the blocks; those evolutions are built from piecewise-constant
matrix exponentials (Hermitian eigendecomposition).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BothZero, NonHermitianInput

__all__ = [
    "INFINITE_RATIO",
    "ConversionGainParams",
    "ParallelDriveParams",
    "conversion_gain_hamiltonian",
    "conversion_gain_unitary",
    "hermitian_expm4",
    "parallel_drive_unitary",
    "drive_ratio",
]

TWO_PI = 2.0 * math.pi

# Explicit marker for a pure-gain drive ray (theta_c = 0), kept distinct
# from any float so it can't be confused with a huge-but-finite ratio.
INFINITE_RATIO = "inf"

_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)
_A = np.kron(_LOWER, np.eye(2))
_B = np.kron(np.eye(2), _LOWER)
_CONV = _A.conj().T @ _B           # a+ b
_GAIN = _A @ _B                    # a b
_X1 = _A + _A.conj().T
_X2 = _B + _B.conj().T


@dataclass(frozen=True)
class ConversionGainParams:
    """Drive strengths/phases and duration of one coupler pulse.

    Strengths in rad/time, phases stored modulo 2 pi, time in the
    normalized pulse unit.  theta_c = g_c * t and theta_g = g_g * t are
    the accumulated block angles.
    """

    g_c: float
    g_g: float
    phi_c: float = 0.0
    phi_g: float = 0.0
    t: float = 1.0

    def __post_init__(self):
        if self.g_c < 0 or self.g_g < 0:
            raise ValueError("drive strengths must be nonnegative")
        if self.t < 0:
            raise ValueError("pulse duration must be nonnegative")
        object.__setattr__(self, "phi_c", self.phi_c % TWO_PI)
        object.__setattr__(self, "phi_g", self.phi_g % TWO_PI)

    @property
    def theta_c(self) -> float:
        return self.g_c * self.t

    @property
    def theta_g(self) -> float:
        return self.g_g * self.t


@dataclass(frozen=True)
class ParallelDriveParams:
    """A coupler pulse with piecewise-constant qubit X drives on top.

    eps1/eps2 hold one amplitude per time step; every step lasts
    base.t / n_steps.
    """

    base: ConversionGainParams
    eps1: tuple = field(default=())
    eps2: tuple = field(default=())

    def __post_init__(self):
        e1 = tuple(float(e) for e in self.eps1)
        e2 = tuple(float(e) for e in self.eps2)
        if len(e1) != len(e2):
            raise ValueError("eps1 and eps2 must have the same length")
        if len(e1) < 1:
            raise ValueError("need at least one drive step")
        object.__setattr__(self, "eps1", e1)
        object.__setattr__(self, "eps2", e2)

    @property
    def n_steps(self) -> int:
        return len(self.eps1)


def conversion_gain_hamiltonian(
    g_c: float, g_g: float, phi_c: float = 0.0, phi_g: float = 0.0
) -> np.ndarray:
    """The 4x4 coupler Hamiltonian matrix (no qubit drives)."""
    h = g_c * (np.exp(1j * phi_c) * _CONV + np.exp(-1j * phi_c) * _CONV.conj().T)
    h += g_g * (np.exp(1j * phi_g) * _GAIN + np.exp(-1j * phi_g) * _GAIN.conj().T)
    return h


def conversion_gain_unitary(p: ConversionGainParams) -> np.ndarray:
    """Exact evolution exp(-i H t) of the undriven coupler.

    Each 2x2 block exponentiates to
    cos(theta) I - i sin(theta) (cos(phi) X -/+ sin(phi) Y).
    """
    return conversion_gain_unitary_batch(
        np.array([[p.g_c, p.g_g, p.phi_c, p.phi_g, p.t]])
    )[0]


def conversion_gain_unitary_batch(params: np.ndarray) -> np.ndarray:
    """Vectorized closed form; params rows are (g_c, g_g, phi_c, phi_g, t)."""
    params = np.asarray(params, dtype=float)
    gc, gg, pc, pg, t = params.T
    th_c, th_g = gc * t, gg * t
    n = len(params)
    u = np.zeros((n, 4, 4), dtype=complex)
    cc, sc = np.cos(th_c), np.sin(th_c)
    cg, sg = np.cos(th_g), np.sin(th_g)
    # conversion block on {|01>, |10>}; H_10,01 = g_c e^{i phi_c}
    u[:, 1, 1] = cc
    u[:, 2, 2] = cc
    u[:, 2, 1] = -1j * sc * np.exp(1j * pc)
    u[:, 1, 2] = -1j * sc * np.exp(-1j * pc)
    # gain block on {|00>, |11>}; H_11,00 = g_g e^{-i phi_g}
    u[:, 0, 0] = cg
    u[:, 3, 3] = cg
    u[:, 3, 0] = -1j * sg * np.exp(-1j * pg)
    u[:, 0, 3] = -1j * sg * np.exp(1j * pg)
    return u


def hermitian_expm4(h: np.ndarray, dt: float = 1.0) -> np.ndarray:
    """exp(-i h dt) for Hermitian h via eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if np.linalg.norm(h - np.conj(h.T)) > 1e-10:
        raise NonHermitianInput("matrix is not Hermitian within 1e-10")
    return _expm_batch(h[None, :, :], dt)[0]


def _expm_batch(h: np.ndarray, dt) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    dt = np.asarray(dt, dtype=float)
    phase = np.exp(-1j * w * (dt[..., None] if dt.ndim else dt))
    return (v * phase[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def parallel_drive_unitary(p: ParallelDriveParams) -> np.ndarray:
    """Time-ordered product of the per-step driven evolutions."""
    eps = np.array([p.eps1, p.eps2], dtype=float)[None, :, :]
    phis = np.array([[p.base.phi_c, p.base.phi_g]])
    return parallel_drive_unitary_batch(
        p.base.g_c, p.base.g_g, phis, eps, p.base.t
    )[0]


def parallel_drive_unitary_batch(
    g_c: float, g_g: float, phis: np.ndarray, eps: np.ndarray, t: float
) -> np.ndarray:
    """Vectorized driven pulses for one (g_c, g_g, t) block shape.

    phis: (n, 2) conversion/gain phases, eps: (n, 2, n_steps) X-drive
    amplitudes.  Returns (n, 4, 4).
    """
    phis = np.asarray(phis, dtype=float)
    eps = np.asarray(eps, dtype=float)
    n, _, n_steps = eps.shape
    dt = t / n_steps
    pc, pg = phis[:, 0], phis[:, 1]
    hcg = g_c * (
        np.exp(1j * pc)[:, None, None] * _CONV
        + np.exp(-1j * pc)[:, None, None] * _CONV.conj().T
    )
    hcg += g_g * (
        np.exp(1j * pg)[:, None, None] * _GAIN
        + np.exp(-1j * pg)[:, None, None] * _GAIN.conj().T
    )
    u = np.broadcast_to(np.eye(4, dtype=complex), (n, 4, 4)).copy()
    for k in range(n_steps):
        h = hcg + eps[:, 0, k, None, None] * _X1 + eps[:, 1, k, None, None] * _X2
        u = _expm_batch(h, dt) @ u
    return u


def drive_ratio(p: ConversionGainParams):
    """beta = theta_g / theta_c; INFINITE_RATIO when theta_c = 0."""
    th_c, th_g = p.theta_c, p.theta_g
    if th_c == 0.0 and th_g == 0.0:
        raise BothZero("drive ratio undefined for theta_c = theta_g = 0")
    if th_c == 0.0:
        return INFINITE_RATIO
    return th_g / th_c
