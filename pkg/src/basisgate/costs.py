"""Gate-count and duration scores for candidate bases.

K counts come from coverage-set membership; durations follow the
speed-limit scaling D = K t_min + (K + 1) d_1q.  Scores aggregate those
durations over target distributions: named targets, Haar, the
CNOT/SWAP-weighted W(lambda) and frequency-weighted sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coverage import (
    CoverageSet,
    JointCoverage,
    _haar_cloud,
    build_coverage,
    canonical_basis,
)
from .exceptions import IncompleteCoverage
from .gates import NAMED_POINTS, WEYL_CNOT, WEYL_SWAP
from .hamiltonian import INFINITE_RATIO
from .optimize import OptimizerConfig
from .speedlimit import SpeedLimit, boundary_for_ratio, min_time, normalize, scaled_duration
from .weyl import WeylPoint

__all__ = [
    "TargetDistribution",
    "ScoreReport",
    "k_cost",
    "d_cost",
    "w_score",
    "v_score",
    "expected_duration",
    "score_report",
    "duration_table_from_counts",
    "best_basis_sweep",
]

_IDENTITY_TOL = 1e-9


@dataclass(frozen=True)
class TargetDistribution:
    """Weighted named targets; weights are normalized on construction."""

    targets: tuple
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights must not all vanish")
        object.__setattr__(self, "weights", tuple(w / total))
        object.__setattr__(
            self,
            "targets",
            tuple(np.asarray(_as_point(t), dtype=float) for t in self.targets),
        )


def _as_point(target) -> np.ndarray:
    if isinstance(target, WeylPoint):
        return target.as_array()
    if isinstance(target, str):
        return np.asarray(NAMED_POINTS[target.lower()], dtype=float)
    return np.asarray(target, dtype=float).reshape(3)


def k_cost(cs: CoverageSet | JointCoverage, target) -> int:
    """Minimal template size reaching the target class (identity costs 0)."""
    point = _as_point(target)
    if np.linalg.norm(point) <= _IDENTITY_TOL:
        return 0
    if isinstance(cs, JointCoverage):
        best = cs.min_duration(point, d_1q=0.0)
        if best is None:
            raise IncompleteCoverage(f"target {point} not covered by joint set")
        return best[1].blocks
    k = cs.min_k(point)
    if k is None:
        raise IncompleteCoverage(
            f"target {point} not covered by {cs.basis_label} up to k={cs.k_max}"
        )
    return k


def basis_min_time(cs: CoverageSet, slf: SpeedLimit) -> float:
    slf = normalize(slf)
    return min_time(slf, cs.basis.theta_c, cs.basis.theta_g)


def d_cost(cs: CoverageSet | JointCoverage, target, slf: SpeedLimit, d_1q: float) -> float:
    """Speed-limit-scaled duration to build the target, in pulses."""
    point = _as_point(target)
    if isinstance(cs, JointCoverage):
        if np.linalg.norm(point) <= _IDENTITY_TOL:
            return d_1q
        best = cs.min_duration(point, d_1q)
        if best is None:
            raise IncompleteCoverage(f"target {point} not covered by joint set")
        return best[0]
    k = k_cost(cs, point)
    return scaled_duration(k, basis_min_time(cs, slf), d_1q)


def w_score(cs, slf: SpeedLimit, d_1q: float, lam: float) -> float:
    """lambda D[CNOT] + (1 - lambda) D[SWAP]."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    return lam * d_cost(cs, WEYL_CNOT, slf, d_1q) + (1.0 - lam) * d_cost(
        cs, WEYL_SWAP, slf, d_1q
    )


def v_score(cs, slf: SpeedLimit, d_1q: float, dist: TargetDistribution) -> float:
    """Frequency-weighted duration sum over a named target distribution."""
    return float(
        sum(w * d_cost(cs, t, slf, d_1q) for t, w in zip(dist.targets, dist.weights))
    )


def expected_duration(
    cs: CoverageSet, slf: SpeedLimit, d_1q: float, n_samples: int = 100_000
) -> float:
    """Haar-expected duration E[K t_min + (K + 1) d_1q], per-sample K."""
    top = cs.levels[-1]
    if top.volume < 0.995:
        raise IncompleteCoverage(
            f"top level k={top.k} covers only {top.volume:.3f} of Haar volume"
        )
    cloud = _haar_cloud(cs.seed, n_samples)
    t_min = basis_min_time(cs, slf)
    ks = np.full(cloud.n, top.k, dtype=float)
    remaining = np.ones(cloud.n, dtype=bool)
    for lv in cs.levels:
        idx = np.where(remaining)[0]
        if idx.size == 0:
            break
        inside = lv.contains_batch(cloud.coords[idx])
        ks[idx[inside]] = lv.k
        remaining[idx[inside]] = False
    return float(np.mean(ks * t_min + (ks + 1) * d_1q))


def expected_duration_joint(
    joint: JointCoverage, d_1q: float, n_samples: int = 100_000, seed: int | None = None
) -> float:
    cloud = _haar_cloud(joint.full.seed if seed is None else seed, n_samples)
    durations, _ = joint.min_durations_batch(cloud.coords, d_1q)
    if not np.all(np.isfinite(durations)):
        covered = durations[np.isfinite(durations)]
        if len(covered) < 0.995 * len(durations):
            raise IncompleteCoverage("joint set covers less than 99.5% of Haar volume")
        durations = np.where(np.isfinite(durations), durations, covered.max())
    return float(durations.mean())


@dataclass
class ScoreReport:
    """Per-basis score row matching the published table layout."""

    basis_label: str
    t_min: float
    d_1q: float
    k: dict = field(default_factory=dict)
    d: dict = field(default_factory=dict)
    e_k_haar: float = math.nan
    e_d_haar: float = math.nan
    k_w: float = math.nan
    w_score: float = math.nan
    v_score: float | None = None

    def as_row(self) -> dict:
        row = {"basis": self.basis_label, "t_min": self.t_min, "d_1q": self.d_1q}
        row.update({f"K[{k}]": v for k, v in self.k.items()})
        row.update({f"D[{k}]": v for k, v in self.d.items()})
        row["E[K[Haar]]"] = self.e_k_haar
        row["E[D[Haar]]"] = self.e_d_haar
        row["K[W]"] = self.k_w
        row["D[W]"] = self.w_score
        if self.v_score is not None:
            row["V"] = self.v_score
        return row


def score_report(
    cs: CoverageSet,
    slf: SpeedLimit,
    d_1q: float,
    lam: float = 0.47,
    n_samples: int = 100_000,
    dist: TargetDistribution | None = None,
) -> ScoreReport:
    from .coverage import expected_k

    t_min = basis_min_time(cs, slf)
    k_cnot = k_cost(cs, WEYL_CNOT)
    k_swap = k_cost(cs, WEYL_SWAP)
    e_k = expected_k(cs, n_samples)
    rep = ScoreReport(
        basis_label=cs.basis_label,
        t_min=t_min,
        d_1q=d_1q,
        k={"cnot": k_cnot, "swap": k_swap},
        d={
            "cnot": scaled_duration(k_cnot, t_min, d_1q),
            "swap": scaled_duration(k_swap, t_min, d_1q),
        },
        e_k_haar=e_k,
        e_d_haar=expected_duration(cs, slf, d_1q, n_samples),
        k_w=lam * k_cnot + (1 - lam) * k_swap,
        w_score=w_score(cs, slf, d_1q, lam),
    )
    if dist is not None:
        rep.v_score = v_score(cs, slf, d_1q, dist)
    return rep


def duration_table_from_counts(
    k_values: dict,
    e_k_values: dict,
    slf: SpeedLimit,
    d_1q: float,
    lam: float = 0.47,
) -> dict:
    """Duration rows computed from given gate counts (no coverage builds).

    k_values: {basis: {"cnot": K, "swap": K}}, e_k_values: {basis: E[K]}.
    Useful for auditing the scaling arithmetic against published counts.
    """
    slf = normalize(slf)
    out = {}
    for label, counts in k_values.items():
        th_c, th_g = _basis_thetas(label)
        t_min = min_time(slf, th_c, th_g)
        d_cnot = scaled_duration(counts["cnot"], t_min, d_1q)
        d_swap = scaled_duration(counts["swap"], t_min, d_1q)
        e_k = e_k_values[label]
        out[label] = {
            "t_min": t_min,
            "d_cnot": d_cnot,
            "d_swap": d_swap,
            "e_d_haar": e_k * t_min + (e_k + 1) * d_1q,
            "d_w": lam * d_cnot + (1 - lam) * d_swap,
        }
    return out


def _basis_thetas(label: str):
    from .coverage import CANONICAL_BASES

    return CANONICAL_BASES[label.lower()]


# ---------------------------------------------------------------------------
# basis sweeps over the drive-ratio plane


def best_basis_sweep(
    slf: SpeedLimit,
    d_1q: float,
    metric: str,
    grid,
    seed: int = 0,
    n_random: int = 600,
    n_restarts: int = 4,
    vol_samples: int = 20_000,
    k_max: int = 8,
    cache: dict | None = None,
):
    """Score every candidate basis (theta_c, theta_g) on the grid.

    Returns (best_theta_c, best_theta_g, best_score, surface) where the
    surface lists (theta_c, theta_g, score); infeasible bases (coverage
    incomplete within the k cap) score inf.
    """
    metric = metric.lower()
    if metric not in ("haar", "cnot", "swap", "w"):
        raise ValueError("metric must be haar, cnot, swap or w")
    slf = normalize(slf)
    cache = cache if cache is not None else {}
    cfg = OptimizerConfig(max_iters=300)
    surface = []
    best = (math.nan, math.nan, math.inf)
    for th_c, th_g in grid:
        key = (round(th_c, 12), round(th_g, 12))
        if key not in cache:
            cache[key] = _sweep_coverage(
                th_c, th_g, slf, seed, n_random, n_restarts, vol_samples, k_max, cfg
            )
        cs = cache[key]
        score = _sweep_score(cs, metric, slf, d_1q, vol_samples)
        surface.append((th_c, th_g, score))
        if score < best[2]:
            best = (th_c, th_g, score)
    return best[0], best[1], best[2], surface


def _sweep_coverage(th_c, th_g, slf, seed, n_random, n_restarts, vol_samples, k_max, cfg):
    beta = INFINITE_RATIO if th_c == 0 else th_g / th_c
    gc, gg = boundary_for_ratio(slf, beta)
    t = th_c / gc if th_c > 0 else th_g / gg
    from .coverage import BasisSpec

    basis = BasisSpec(
        label=f"sweep_{th_c:.4f}_{th_g:.4f}", theta_c=th_c, theta_g=th_g,
        g_c=gc, g_g=gg, t=t,
    )
    return build_coverage(
        basis,
        parallel=False,
        k_max=k_max,
        n_random=n_random,
        cfg=cfg,
        seed=seed,
        n_restarts=n_restarts,
        vol_samples=vol_samples,
    )


def _sweep_score(cs, metric, slf, d_1q, vol_samples):
    try:
        if metric == "cnot":
            return d_cost(cs, WEYL_CNOT, slf, d_1q)
        if metric == "swap":
            return d_cost(cs, WEYL_SWAP, slf, d_1q)
        if metric == "w":
            return w_score(cs, slf, d_1q, 0.47)
        return expected_duration(cs, slf, d_1q, vol_samples)
    except IncompleteCoverage:
        return math.inf
