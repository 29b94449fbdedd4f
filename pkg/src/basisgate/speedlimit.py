"""Speed-limit functions over (g_c, g_g) drive space and pulse scaling.

A speed limit function (SLF) is the feasibility boundary for combined
conversion/gain drive strengths.  Gates are scaled onto the boundary
along their drive ray g_g = beta g_c, which fixes the fastest strengths
(g_c_max, g_g_max) and the minimal pulse time t_min = theta_c / g_c_max.
After normalization the fastest full iSWAP takes t_min = 1; all durations
are quoted in that pulse unit.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DegenerateBoundary, NoIntersection
from .hamiltonian import INFINITE_RATIO

__all__ = [
    "SpeedLimit",
    "LinearSpeedLimit",
    "SquaredSpeedLimit",
    "TabulatedSpeedLimit",
    "ScaledGateCost",
    "load_slf",
    "normalize",
    "boundary_for_ratio",
    "min_time",
    "scaled_duration",
]

HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class ScaledGateCost:
    """Result of scaling one gate to the boundary (Alg. 'scale to SLF')."""

    g_c_max: float
    g_g_max: float
    t_min: float
    d_total: float


class SpeedLimit:
    """Base class; subclasses define the boundary g_g(g_c) and intercepts."""

    def x_intercept(self) -> float:
        raise NotImplementedError

    def y_intercept(self) -> float:
        raise NotImplementedError

    def scaled(self, factor: float) -> "SpeedLimit":
        raise NotImplementedError

    def intersect_ray(self, beta) -> tuple[float, float]:
        raise NotImplementedError


@dataclass(frozen=True)
class LinearSpeedLimit(SpeedLimit):
    """g_c + g_g <= L, boundary g_g = L - g_c."""

    limit: float = HALF_PI

    def x_intercept(self) -> float:
        return self.limit

    def y_intercept(self) -> float:
        return self.limit

    def scaled(self, factor: float) -> "LinearSpeedLimit":
        return LinearSpeedLimit(self.limit * factor)

    def intersect_ray(self, beta) -> tuple[float, float]:
        if beta == INFINITE_RATIO:
            return 0.0, self.limit
        gc = self.limit / (1.0 + beta)
        return gc, beta * gc


@dataclass(frozen=True)
class SquaredSpeedLimit(SpeedLimit):
    """g_c^2 + g_g^2 <= L^2, boundary g_g = sqrt(L^2 - g_c^2)."""

    limit: float = HALF_PI

    def x_intercept(self) -> float:
        return self.limit

    def y_intercept(self) -> float:
        return self.limit

    def scaled(self, factor: float) -> "SquaredSpeedLimit":
        return SquaredSpeedLimit(self.limit * factor)

    def intersect_ray(self, beta) -> tuple[float, float]:
        if beta == INFINITE_RATIO:
            return 0.0, self.limit
        gc = self.limit / math.sqrt(1.0 + beta * beta)
        return gc, beta * gc


@dataclass(frozen=True)
class TabulatedSpeedLimit(SpeedLimit):
    """Experimental boundary samples, linearly interpolated.

    Points must have strictly increasing g_c and a nonincreasing g_g
    boundary; outside the sampled g_c range the boundary clamps to the
    nearest endpoint.  Noisy boundaries are rejected unless strict=False,
    which applies a monotone (isotonic) repair with a warning.
    """

    g_c: tuple
    g_g: tuple

    def __post_init__(self):
        gc = np.asarray(self.g_c, dtype=float)
        gg = np.asarray(self.g_g, dtype=float)
        if gc.size < 2:
            raise ValueError("tabulated boundary needs at least two samples")
        if np.any(np.diff(gc) <= 0):
            raise ValueError("tabulated g_c must be strictly increasing")
        if np.any(gg < 0):
            raise ValueError("tabulated g_g must be nonnegative")
        if np.any(np.diff(gg) > 1e-12):
            raise ValueError(
                "tabulated boundary must be nonincreasing; pass strict=False "
                "to load_slf for isotonic repair"
            )
        object.__setattr__(self, "g_c", tuple(gc))
        object.__setattr__(self, "g_g", tuple(gg))

    def x_intercept(self) -> float:
        return float(self.g_c[-1])

    def y_intercept(self) -> float:
        return float(self.g_g[0])

    def scaled(self, factor: float) -> "TabulatedSpeedLimit":
        return TabulatedSpeedLimit(
            tuple(g * factor for g in self.g_c),
            tuple(g * factor for g in self.g_g),
        )

    def boundary(self, gc: float) -> float:
        return float(np.interp(gc, self.g_c, self.g_g))

    def intersect_ray(self, beta) -> tuple[float, float]:
        if beta == INFINITE_RATIO:
            return 0.0, self.y_intercept()
        gc = np.asarray(self.g_c)
        gg = np.asarray(self.g_g)
        # f(gc) = beta*gc - SLF(gc) is increasing; walk segments for the root
        f = beta * gc - gg
        if f[0] >= 0.0:
            # crossing happens in the clamped head (boundary = gg[0] there)
            if beta == 0.0:
                return float(gc[-1]), 0.0
            return float(gg[0] / beta), float(gg[0])
        if f[-1] < 0.0:
            # ray exits through the clamped tail: g_g stays at gg[-1]
            if beta == 0.0:
                return float(gc[-1]), 0.0
            return float(gg[-1] / beta), float(gg[-1])
        idx = int(np.searchsorted(f > 0, True))
        g0, g1 = gc[idx - 1], gc[idx]
        b0, b1 = gg[idx - 1], gg[idx]
        slope = (b1 - b0) / (g1 - g0)
        denom = beta - slope
        if abs(denom) < 1e-15:
            raise NoIntersection("ray parallel to boundary segment")
        x = (b0 - slope * g0) / denom
        return float(x), float(beta * x)


def load_slf(path: str | Path, strict: bool = True) -> TabulatedSpeedLimit:
    """Read a tabulated SLF from CSV with header ``g_c,g_g``."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["g_c", "g_g"]:
            raise ValueError(f"{path}: expected CSV header 'g_c,g_g'")
        rows = [(float(r["g_c"]), float(r["g_g"])) for r in reader]
    gc = [r[0] for r in rows]
    gg = [r[1] for r in rows]
    if not strict:
        repaired = np.minimum.accumulate(gg)
        if not np.allclose(repaired, gg):
            import warnings

            warnings.warn(f"{path}: boundary not monotone, applied isotonic repair")
        gg = list(repaired)
    return TabulatedSpeedLimit(tuple(gc), tuple(gg))


def normalize(slf: SpeedLimit) -> SpeedLimit:
    """Rescale uniformly so max(x intercept, y intercept) = pi/2.

    Consequence: the fastest full iSWAP runs at t_min = 1 pulse.
    """
    top = max(slf.x_intercept(), slf.y_intercept())
    if top <= 0.0:
        raise DegenerateBoundary("speed limit has no positive intercept")
    return slf.scaled(HALF_PI / top)


def boundary_for_ratio(slf: SpeedLimit, beta) -> tuple[float, float]:
    """Strongest feasible (g_c_max, g_g_max) on the ray g_g = beta g_c."""
    if beta != INFINITE_RATIO and beta < 0:
        raise ValueError("drive ratio must be nonnegative")
    return slf.intersect_ray(beta)


def min_time(slf: SpeedLimit, theta_c: float, theta_g: float) -> float:
    """Fastest pulse time realizing block angles (theta_c, theta_g)."""
    if theta_c < 0 or theta_g < 0:
        raise ValueError("pulse angles must be nonnegative")
    if theta_c == 0.0 and theta_g == 0.0:
        return 0.0
    if theta_c == 0.0:
        _, gg = boundary_for_ratio(slf, INFINITE_RATIO)
        return theta_g / gg
    gc, _ = boundary_for_ratio(slf, theta_g / theta_c)
    return theta_c / gc


def scaled_duration(k: int, t_min: float, d_1q: float) -> float:
    """Total template duration K t_min + (K + 1) d_1q (pulses)."""
    if k < 0:
        raise ValueError("repetition count must be nonnegative")
    return k * t_min + (k + 1) * d_1q
