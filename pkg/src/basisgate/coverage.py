"""Coverage sets: which Weyl-chamber classes a basis template can reach.

For each repetition count k the reachable classes are estimated
numerically: draw random template parameters, additionally steer the
template toward the exterior points I, CNOT, iSWAP and SWAP with a
Nelder-Mead search (recording every coordinate along each training
path), split the collected coordinates at the c1 = pi/2 plane to keep
each side convex, and hull the two sides.  The loop stops once the
Haar-weighted volume of the hulls saturates or k_max is reached.

Hulls are advisory for generic membership; for the four tracked exterior
targets reachability is only declared once an actual template instance
has converged below the loss tolerance.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import IncompatibleBases, IncompleteCoverage
from .gates import NAMED_POINTS
from .hull import ConvexPolytope3, convex_hull3
from .hamiltonian import (
    conversion_gain_unitary_batch,
    parallel_drive_unitary_batch,
)
from .optimize import OptimizerConfig, OptimizerResult, least_squares_polish, nelder_mead
from .speedlimit import HALF_PI, LinearSpeedLimit, SpeedLimit, boundary_for_ratio, normalize
from .weyl import (
    canonical_coordinates_batch,
    haar_random_unitary4_batch,
    invariants_from_coordinate,
    makhlin_invariants_batch,
)
from .hamiltonian import INFINITE_RATIO

__all__ = [
    "BasisSpec",
    "Template",
    "CoverageLevel",
    "CoverageSet",
    "JointCoverage",
    "HaarCloud",
    "CANONICAL_BASES",
    "EXTERIOR_TARGETS",
    "canonical_basis",
    "template_coordinate",
    "build_coverage",
    "build_joint_coverage",
    "haar_volume",
    "expected_k",
    "coverage_cache_key",
    "save_coverage",
    "load_coverage",
]

PI = math.pi
SPLIT_TOL = 1e-9          # points this close to c1 = pi/2 join both halves
TARGET_MATCH_TOL = 1e-6   # query points this close to a tracked target use it
DRIVE_STEP = 0.25         # one X-drive step lasts a quarter pulse

# theta_c, theta_g of the six comparison bases
CANONICAL_BASES = {
    "iswap": (HALF_PI, 0.0),
    "sqiswap": (PI / 4, 0.0),
    "cnot": (PI / 4, PI / 4),
    "sqcnot": (PI / 8, PI / 8),
    "b": (3 * PI / 8, PI / 8),
    "sqb": (3 * PI / 16, PI / 16),
}

EXTERIOR_TARGETS = ("identity", "cnot", "iswap", "swap")


@dataclass(frozen=True)
class BasisSpec:
    """A fixed coupler pulse used as the template's 2Q block.

    steps overrides the default drive-step count (one step per quarter
    pulse); synthesis uses finer steps for very short blocks.
    """

    label: str
    theta_c: float
    theta_g: float
    g_c: float
    g_g: float
    t: float
    steps: int | None = None

    @property
    def n_steps(self) -> int:
        if self.steps is not None:
            return self.steps
        return max(1, round(self.t / DRIVE_STEP))

    def fractional_ratio(self, other: "BasisSpec") -> float | None:
        """self = other**r for block angles; None when not on the same ray."""
        tot_s = self.theta_c + self.theta_g
        tot_o = other.theta_c + other.theta_g
        if tot_o == 0:
            return None
        r = tot_s / tot_o
        if (
            abs(self.theta_c - r * other.theta_c) < 1e-12
            and abs(self.theta_g - r * other.theta_g) < 1e-12
        ):
            return r
        return None


def canonical_basis(
    name: str, slf: SpeedLimit | None = None
) -> BasisSpec:
    """One of the six comparison bases, scaled to the speed limit.

    The pulse runs at the strongest feasible drive on its ray, so the
    block time equals the basis's t_min under the (normalized) SLF.
    """
    key = name.lower()
    if key not in CANONICAL_BASES:
        raise ValueError(f"unknown basis {name!r}; pick from {sorted(CANONICAL_BASES)}")
    th_c, th_g = CANONICAL_BASES[key]
    slf = normalize(slf if slf is not None else LinearSpeedLimit())
    beta = INFINITE_RATIO if th_c == 0 else th_g / th_c
    gc, gg = boundary_for_ratio(slf, beta)
    t = th_c / gc if th_c > 0 else th_g / gg
    return BasisSpec(label=key, theta_c=th_c, theta_g=th_g, g_c=gc, g_g=gg, t=t)


class Template:
    """K basis blocks with free phases, drive amplitudes and junction 1Q gates.

    Parameter layout per block i (0-based):
      [phi_c, phi_g]
      [eps1 * n_steps, eps2 * n_steps]        (parallel drive only)
      [3 + 3 junction Euler angles]           (between blocks, i < k-1)
    """

    def __init__(self, blocks: list[BasisSpec], parallel: bool):
        self.blocks = list(blocks)
        self.parallel = parallel
        self.slices = []
        pos = 0
        for i, blk in enumerate(self.blocks):
            entry = {"phis": (pos, pos + 2)}
            pos += 2
            if parallel:
                entry["eps"] = (pos, pos + 2 * blk.n_steps)
                pos += 2 * blk.n_steps
            if i < len(self.blocks) - 1:
                entry["junction"] = (pos, pos + 6)
                pos += 6
            self.slices.append(entry)
        self.n_params = pos

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def twoq_time(self) -> float:
        return sum(b.t for b in self.blocks)

    def unitaries(self, params: np.ndarray) -> np.ndarray:
        """Batched evaluation; params (N, n_params) -> (N, 4, 4)."""
        params = np.atleast_2d(np.asarray(params, dtype=float))
        if params.shape[1] != self.n_params:
            raise ValueError(
                f"template expects {self.n_params} parameters, got {params.shape[1]}"
            )
        n = params.shape[0]
        u = None
        for i, blk in enumerate(self.blocks):
            s = self.slices[i]
            phis = params[:, s["phis"][0]:s["phis"][1]]
            if self.parallel:
                lo, hi = s["eps"]
                eps = params[:, lo:hi].reshape(n, 2, blk.n_steps)
                bu = parallel_drive_unitary_batch(blk.g_c, blk.g_g, phis, eps, blk.t)
            else:
                rows = np.column_stack(
                    [
                        np.full(n, blk.g_c),
                        np.full(n, blk.g_g),
                        phis[:, 0],
                        phis[:, 1],
                        np.full(n, blk.t),
                    ]
                )
                bu = conversion_gain_unitary_batch(rows)
            u = bu if u is None else bu @ u
            if "junction" in s:
                lo, hi = s["junction"]
                u = _local_layer_batch(params[:, lo:hi]) @ u
        return u

    def unitary(self, params: np.ndarray) -> np.ndarray:
        return self.unitaries(params)[0]


def _u2_batch(angles: np.ndarray) -> np.ndarray:
    """Batched u3-style single-qubit gates; angles (N, 3) -> (N, 2, 2)."""
    th, ph, lm = angles[:, 0], angles[:, 1], angles[:, 2]
    ct, st = np.cos(th / 2.0), np.sin(th / 2.0)
    out = np.empty((len(angles), 2, 2), dtype=complex)
    out[:, 0, 0] = ct
    out[:, 0, 1] = -np.exp(1j * lm) * st
    out[:, 1, 0] = np.exp(1j * ph) * st
    out[:, 1, 1] = np.exp(1j * (ph + lm)) * ct
    return out


def _local_layer_batch(angles6: np.ndarray) -> np.ndarray:
    u1 = _u2_batch(angles6[:, :3])
    u2 = _u2_batch(angles6[:, 3:])
    return np.einsum("nab,ncd->nacbd", u1, u2).reshape(-1, 4, 4)


def template_coordinate(
    basis: BasisSpec, k: int, free_params: np.ndarray, parallel: bool
) -> np.ndarray:
    """Canonical coordinate of one instantiated template."""
    tpl = Template([basis] * k, parallel)
    return canonical_coordinates_batch(tpl.unitaries(free_params))[0]


# ---------------------------------------------------------------------------
# coverage sets


@dataclass
class CoverageLevel:
    k: int
    left: ConvexPolytope3 | None
    right: ConvexPolytope3 | None
    volume: float
    confirmed: dict
    n_points: int

    def contains(self, point: np.ndarray, tol: float = 1e-8) -> bool:
        return bool(self.contains_batch(np.atleast_2d(point), tol)[0])

    def contains_batch(self, pts: np.ndarray, tol: float = 1e-8) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        inside = np.zeros(len(pts), dtype=bool)
        for poly in (self.left, self.right):
            if poly is not None:
                inside |= poly.contains_batch(pts, tol)
        return inside


@dataclass
class CoverageSet:
    basis: BasisSpec
    parallel: bool
    levels: list
    n_samples: int
    seed: int
    complete: bool
    basis_label: str = ""

    def __post_init__(self):
        if not self.basis_label:
            self.basis_label = self.basis.label

    @property
    def k_max(self) -> int:
        return self.levels[-1].k if self.levels else 0

    def level(self, k: int) -> CoverageLevel:
        for lv in self.levels:
            if lv.k == k:
                return lv
        raise IncompleteCoverage(f"no stored level k={k} for {self.basis_label}")

    def _tracked_target(self, point: np.ndarray) -> str | None:
        for name in EXTERIOR_TARGETS:
            if np.linalg.norm(point - np.asarray(NAMED_POINTS[name])) <= TARGET_MATCH_TOL:
                return name
        return None

    def min_k(self, point, tol: float = 1e-8) -> int | None:
        """Smallest stored k whose region contains the class.

        For the tracked exterior targets a converged template is the
        ground truth; hull membership alone is not trusted there.
        """
        point = np.asarray(point, dtype=float).reshape(3)
        target = self._tracked_target(point)
        if target is not None:
            for lv in self.levels:
                if lv.confirmed.get(target):
                    return lv.k
            return None
        for lv in self.levels:
            if lv.contains(point, tol):
                return lv.k
        return None


@dataclass
class HaarCloud:
    """A reusable cloud of Haar-sample canonical coordinates."""

    coords: np.ndarray
    seed: int

    @classmethod
    def generate(cls, seed: int, n: int) -> "HaarCloud":
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x48AA]))
        us = haar_random_unitary4_batch(rng, n)
        return cls(coords=canonical_coordinates_batch(us), seed=seed)

    @property
    def n(self) -> int:
        return len(self.coords)


_HAAR_CACHE: dict = {}


def _haar_cloud(seed: int, n: int) -> HaarCloud:
    key = (seed, n)
    if key not in _HAAR_CACHE:
        _HAAR_CACHE[key] = HaarCloud.generate(seed, n)
    return _HAAR_CACHE[key]


def _split_halves(points: np.ndarray):
    left = points[points[:, 0] <= PI / 2 + SPLIT_TOL]
    right = points[points[:, 0] >= PI / 2 - SPLIT_TOL]
    return left, right


def _hull_or_none(points: np.ndarray) -> ConvexPolytope3 | None:
    if len(points) == 0:
        return None
    return convex_hull3(points)


def _target_invariants() -> dict:
    return {
        name: invariants_from_coordinate(np.asarray(NAMED_POINTS[name]))
        for name in EXTERIOR_TARGETS
    }


def build_coverage(
    basis: BasisSpec,
    parallel: bool,
    k_max: int = 8,
    n_random: int = 3000,
    cfg: OptimizerConfig | None = None,
    seed: int = 0,
    n_restarts: int = 8,
    vol_samples: int = 100_000,
    vol_threshold: float = 0.9995,
    workers: int = 1,
    blocks_override: list | None = None,
) -> CoverageSet:
    """Estimate per-k coverage polytopes for a basis template.

    blocks_override replaces the homogeneous block list (used for joint
    mixed templates); k then counts list entries and k_max is ignored.
    """
    cfg = cfg or OptimizerConfig()
    master = np.random.SeedSequence([seed, _stable_hash(basis.label), int(parallel)])
    cloud = _haar_cloud(seed, vol_samples)
    tinv = _target_invariants()

    levels: list[CoverageLevel] = []
    cumulative: list[np.ndarray] = []
    confirmed_at: dict = {}
    complete = False

    k_list = [len(blocks_override)] if blocks_override is not None else range(1, k_max + 1)
    for k in k_list:
        blocks = blocks_override if blocks_override is not None else [basis] * k
        tpl = Template(blocks, parallel)
        seeds = master.spawn(2 + len(EXTERIOR_TARGETS))

        rng = np.random.default_rng(seeds[0])
        lo, hi = cfg.param_bounds
        draws = rng.uniform(lo, hi, size=(n_random, tpl.n_params))
        pts = [canonical_coordinates_batch(tpl.unitaries(draws))]

        confirmed = {t: confirmed_at.get(t, 10**9) <= k for t in EXTERIOR_TARGETS}
        todo = [t for t in EXTERIOR_TARGETS if not confirmed[t]]
        results = _optimize_targets(
            tpl, todo, tinv, cfg, seeds[2:], n_restarts, workers
        )
        for tname, (best_loss, path_pts) in results.items():
            pts.append(path_pts)
            if best_loss <= cfg.loss_tol:
                confirmed[tname] = True
                confirmed_at.setdefault(tname, k)

        level_pts = np.vstack(pts)
        cumulative.append(level_pts)
        all_pts = np.vstack(cumulative)
        left_pts, right_pts = _split_halves(all_pts)
        left = _hull_or_none(left_pts)
        right = _hull_or_none(right_pts)
        lv = CoverageLevel(
            k=k, left=left, right=right, volume=0.0,
            confirmed=confirmed, n_points=len(all_pts),
        )
        lv.volume = float(lv.contains_batch(cloud.coords).mean())
        levels.append(lv)
        if lv.volume >= vol_threshold:
            complete = True
            break

    return CoverageSet(
        basis=basis,
        parallel=parallel,
        levels=levels,
        n_samples=n_random,
        seed=seed,
        complete=complete,
    )


def _optimize_targets(tpl, targets, tinv, cfg, seedseqs, n_restarts, workers):
    """Nelder-Mead steering toward each exterior target, path recording.

    Returns {target: (best_loss, path_coords)}; a least-squares polish is
    applied when the simplex gets close but not under tolerance, since
    convergence here is the reachability ground truth.
    """

    def run_target(args):
        tname, seedseq = args
        gt = tinv[tname]
        child = np.random.default_rng(seedseq)

        def loss(x):
            g = makhlin_invariants_batch(tpl.unitaries(x[None, :]))[0]
            return float(np.sum((g - gt) ** 2))

        best_loss, best_x = np.inf, None
        path_xs = []
        lo, hi = cfg.param_bounds
        for _ in range(n_restarts):
            x0 = child.uniform(lo, hi, tpl.n_params)
            res: OptimizerResult = nelder_mead(loss, x0, cfg)
            path_xs.extend(x for _, _, x in res.trace)
            if res.fun < best_loss:
                best_loss, best_x = res.fun, res.x
            if best_loss <= cfg.loss_tol:
                break
        if cfg.loss_tol < best_loss <= 1e-2 and best_x is not None:
            def residual(x):
                g = makhlin_invariants_batch(tpl.unitaries(x[None, :]))[0]
                return g - gt

            x_pol, cost = least_squares_polish(residual, best_x, cfg.param_bounds)
            if cost < best_loss:
                best_loss, best_x = cost, x_pol
                path_xs.append(x_pol)
        coords = canonical_coordinates_batch(tpl.unitaries(np.array(path_xs)))
        return tname, (best_loss, coords)

    jobs = list(zip(targets, seedseqs))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = dict(pool.map(run_target, jobs))
    else:
        out = dict(map(run_target, jobs))
    return out


def haar_volume(
    cs: CoverageSet, k: int, n_samples: int = 100_000, rng_seed: int | None = None
) -> float:
    """Haar-weighted fraction of classes inside the level-k hulls."""
    cloud = _haar_cloud(cs.seed if rng_seed is None else rng_seed, n_samples)
    return float(cs.level(k).contains_batch(cloud.coords).mean())


def expected_k(
    cs: CoverageSet, n_samples: int = 100_000, rng_seed: int | None = None
) -> float:
    """Monte Carlo E[minimal k covering a Haar-random class]."""
    top = cs.levels[-1]
    if top.volume < 0.995:
        raise IncompleteCoverage(
            f"top level k={top.k} covers only {top.volume:.3f} of Haar volume"
        )
    cloud = _haar_cloud(cs.seed if rng_seed is None else rng_seed, n_samples)
    ks = np.full(cloud.n, top.k, dtype=float)
    remaining = np.ones(cloud.n, dtype=bool)
    for lv in cs.levels:
        idx = np.where(remaining)[0]
        if idx.size == 0:
            break
        inside = lv.contains_batch(cloud.coords[idx])
        ks[idx[inside]] = lv.k
        remaining[idx[inside]] = False
    return float(ks.mean())


# ---------------------------------------------------------------------------
# joint coverage over a full basis and one of its fractional powers


@dataclass(frozen=True)
class JointCombo:
    m: int               # full-basis blocks
    n: int               # fractional-basis blocks
    twoq_time: float
    level: CoverageLevel

    @property
    def blocks(self) -> int:
        return self.m + self.n

    def duration(self, d_1q: float) -> float:
        return self.twoq_time + (self.blocks + 1) * d_1q


@dataclass
class JointCoverage:
    """Union membership over combinations of full and fractional blocks."""

    full: CoverageSet
    frac: CoverageSet
    ratio: float
    combos: list

    def min_duration(self, point, d_1q: float, tol: float = 1e-8):
        """Cheapest covering template; returns (duration, combo) or None."""
        point = np.asarray(point, dtype=float).reshape(3)
        target = self.full._tracked_target(point)
        best = None
        for combo in self.combos:
            if target is not None:
                ok = combo.level.confirmed.get(target, False)
            else:
                ok = combo.level.contains(point, tol)
            if ok:
                d = combo.duration(d_1q)
                if best is None or d < best[0]:
                    best = (d, combo)
        return best

    def min_durations_batch(self, pts: np.ndarray, d_1q: float, tol: float = 1e-8):
        pts = np.atleast_2d(pts)
        out = np.full(len(pts), np.inf)
        blocks = np.zeros(len(pts))
        order = sorted(self.combos, key=lambda c: c.duration(d_1q))
        remaining = np.ones(len(pts), dtype=bool)
        for combo in order:
            idx = np.where(remaining)[0]
            if idx.size == 0:
                break
            inside = combo.level.contains_batch(pts[idx], tol)
            out[idx[inside]] = combo.duration(d_1q)
            blocks[idx[inside]] = combo.blocks
            remaining[idx[inside]] = False
        return out, blocks


def build_joint_coverage(
    full: CoverageSet,
    frac: CoverageSet,
    seed: int = 0,
    n_random: int = 3000,
    cfg: OptimizerConfig | None = None,
    n_restarts: int = 8,
    max_blocks: int = 6,
    vol_samples: int = 100_000,
    workers: int = 1,
) -> JointCoverage:
    """Combine a basis with its fractional power, minimal-duration rule.

    Pure combinations reuse the stored per-k levels; mixed combinations
    (m full + n fractional blocks) get their own hull builds.
    """
    if not (full.parallel and frac.parallel):
        raise IncompatibleBases("joint coverage expects parallel-drive sets")
    ratio = frac.basis.fractional_ratio(full.basis)
    if ratio is None or not 0 < ratio < 1:
        raise IncompatibleBases(
            f"{frac.basis_label} is not a fractional power of {full.basis_label}"
        )

    t_full, t_frac = full.basis.t, frac.basis.t
    combos: list[JointCombo] = []
    for lv in full.levels:
        combos.append(JointCombo(m=lv.k, n=0, twoq_time=lv.k * t_full, level=lv))
    for lv in frac.levels:
        combos.append(JointCombo(m=0, n=lv.k, twoq_time=lv.k * t_frac, level=lv))

    cloud = _haar_cloud(seed, vol_samples)

    def union_volume():
        inside = np.zeros(cloud.n, dtype=bool)
        for c in combos:
            inside |= c.level.contains_batch(cloud.coords)
        return float(inside.mean())

    # mixed templates, cheapest 2Q time first
    candidates = [
        (m, n)
        for m in range(1, max_blocks)
        for n in range(1, max_blocks)
        if m + n <= max_blocks
    ]
    candidates.sort(key=lambda mn: (mn[0] * t_full + mn[1] * t_frac, mn[0] + mn[1]))
    for m, n in candidates:
        if union_volume() >= 0.9995 and _exteriors_all_confirmed(combos):
            break
        blocks = [full.basis] * m + [frac.basis] * n
        sub = build_coverage(
            full.basis,
            parallel=True,
            n_random=n_random,
            cfg=cfg,
            seed=seed + 1000 * m + n,
            n_restarts=n_restarts,
            vol_samples=vol_samples,
            workers=workers,
            blocks_override=blocks,
        )
        combos.append(
            JointCombo(
                m=m, n=n, twoq_time=m * t_full + n * t_frac, level=sub.levels[0]
            )
        )

    return JointCoverage(full=full, frac=frac, ratio=ratio, combos=combos)


def _exteriors_all_confirmed(combos) -> bool:
    return all(
        any(c.level.confirmed.get(t, False) for c in combos)
        for t in EXTERIOR_TARGETS
    )


# ---------------------------------------------------------------------------
# persistence


def _stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "big")


def coverage_cache_key(basis: BasisSpec, parallel: bool, seed: int, n_random: int, k_max: int) -> str:
    payload = json.dumps(
        {
            "label": basis.label,
            "theta": [basis.theta_c, basis.theta_g],
            "g": [basis.g_c, basis.g_g],
            "t": basis.t,
            "parallel": parallel,
            "seed": seed,
            "n": n_random,
            "k_max": k_max,
            "v": 1,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def save_coverage(cs: CoverageSet, path: str | Path) -> None:
    doc = {
        "basis_label": cs.basis_label,
        "basis": {
            "label": cs.basis.label,
            "theta_c": cs.basis.theta_c,
            "theta_g": cs.basis.theta_g,
            "g_c": cs.basis.g_c,
            "g_g": cs.basis.g_g,
            "t": cs.basis.t,
        },
        "parallel": cs.parallel,
        "n_samples": cs.n_samples,
        "seed": cs.seed,
        "complete": cs.complete,
        "levels": [
            {
                "k": lv.k,
                "volume": lv.volume,
                "confirmed": lv.confirmed,
                "n_points": lv.n_points,
                "left": None if lv.left is None else lv.left.vertices.tolist(),
                "right": None if lv.right is None else lv.right.vertices.tolist(),
            }
            for lv in cs.levels
        ],
    }
    Path(path).write_text(json.dumps(doc))


def load_coverage(path: str | Path) -> CoverageSet:
    doc = json.loads(Path(path).read_text())
    basis = BasisSpec(**doc["basis"])
    levels = []
    for lvdoc in doc["levels"]:
        left = None if lvdoc["left"] is None else convex_hull3(np.array(lvdoc["left"]))
        right = None if lvdoc["right"] is None else convex_hull3(np.array(lvdoc["right"]))
        levels.append(
            CoverageLevel(
                k=lvdoc["k"],
                left=left,
                right=right,
                volume=lvdoc["volume"],
                confirmed=lvdoc["confirmed"],
                n_points=lvdoc["n_points"],
            )
        )
    return CoverageSet(
        basis=basis,
        parallel=doc["parallel"],
        levels=levels,
        n_samples=doc["n_samples"],
        seed=doc["seed"],
        complete=doc["complete"],
        basis_label=doc["basis_label"],
    )
