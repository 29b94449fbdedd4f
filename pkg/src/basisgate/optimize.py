"""Derivative-free optimization for template fitting.

A standard Nelder-Mead simplex (reflection / expansion / contraction /
shrink) with box-constraint clipping, plus a damped least-squares polish
used to push nearly-converged template fits to machine precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = ["OptimizerConfig", "OptimizerResult", "nelder_mead", "least_squares_polish"]


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for the simplex search.

    param_bounds is a closed box applied to every candidate point.
    simplex_init_scale sets the initial vertex displacement relative to
    the box width.  adaptive switches to the dimension-scaled
    coefficients of Gao & Han (2012), which behave better above ~10
    parameters.
    """

    max_iters: int = 500
    simplex_init_scale: float = 0.1
    loss_tol: float = 1e-6
    param_bounds: tuple[float, float] = (0.0, 2 * np.pi)
    adaptive: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.loss_tol <= 0:
            raise ValueError("loss_tol must be positive")


@dataclass
class OptimizerResult:
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    cfg: OptimizerConfig = OptimizerConfig(),
    callback: Callable[[np.ndarray, float], None] | None = None,
) -> OptimizerResult:
    """Minimize f over the configured box starting from x0.

    The trace records (iteration, f_best, x_best) whenever the incumbent
    improves; nonconvergence is reported via ``converged``, never raised.
    """
    lo, hi = cfg.param_bounds
    x0 = np.clip(np.asarray(x0, dtype=float), lo, hi)
    n = len(x0)

    if cfg.adaptive and n > 0:
        rho, chi, psi, sigma = 1.0, 1.0 + 2.0 / n, 0.75 - 1.0 / (2.0 * n), 1.0 - 1.0 / n
    else:
        rho, chi, psi, sigma = 1.0, 2.0, 0.5, 0.5

    step = cfg.simplex_init_scale * (hi - lo)
    sim = np.tile(x0, (n + 1, 1))
    for k in range(n):
        sim[k + 1, k] = x0[k] + step if x0[k] + step <= hi else x0[k] - step
    fs = np.array([f(v) for v in sim])
    evals = n + 1

    trace = []
    best_i = int(np.argmin(fs))
    trace.append((0, float(fs[best_i]), sim[best_i].copy()))
    if callback:
        callback(sim[best_i], float(fs[best_i]))

    iters = 0
    for iters in range(1, cfg.max_iters + 1):
        order = np.argsort(fs)
        sim, fs = sim[order], fs[order]
        if fs[0] <= cfg.loss_tol:
            break

        centroid = sim[:-1].mean(axis=0)
        xr = np.clip(centroid + rho * (centroid - sim[-1]), lo, hi)
        fr = f(xr)
        evals += 1
        if fr < fs[0]:
            xe = np.clip(centroid + rho * chi * (centroid - sim[-1]), lo, hi)
            fe = f(xe)
            evals += 1
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = np.clip(centroid + psi * rho * (centroid - sim[-1]), lo, hi)
            else:
                xc = np.clip(centroid - psi * (centroid - sim[-1]), lo, hi)
            fc = f(xc)
            evals += 1
            if fc < min(fr, fs[-1]):
                sim[-1], fs[-1] = xc, fc
            else:
                for k in range(1, n + 1):
                    sim[k] = np.clip(sim[0] + sigma * (sim[k] - sim[0]), lo, hi)
                    fs[k] = f(sim[k])
                evals += n

        i = int(np.argmin(fs))
        if fs[i] < trace[-1][1]:
            trace.append((iters, float(fs[i]), sim[i].copy()))
            if callback:
                callback(sim[i], float(fs[i]))

    i = int(np.argmin(fs))
    return OptimizerResult(
        x=sim[i].copy(),
        fun=float(fs[i]),
        iterations=iters,
        converged=bool(fs[i] <= cfg.loss_tol),
        trace=trace,
    )


def least_squares_polish(
    residual: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    bounds: tuple[float, float],
    max_iters: int = 40,
    tol: float = 1e-14,
    fd_step: float = 1e-7,
) -> tuple[np.ndarray, float]:
    """Damped Gauss-Newton on a residual vector, finite-difference Jacobian.

    Returns (x, sum-of-squares).  Intended for final refinement once the
    simplex search has found the right basin.
    """
    lo, hi = bounds
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    r = residual(x)
    cost = float(r @ r)
    lam = 1e-6
    for _ in range(max_iters):
        if cost <= tol:
            break
        jac = np.empty((len(r), len(x)))
        for j in range(len(x)):
            xp = x.copy()
            xp[j] += fd_step
            jac[:, j] = (residual(xp) - r) / fd_step
        jtj = jac.T @ jac
        g = jac.T @ r
        improved = False
        for _ in range(12):
            try:
                delta = np.linalg.solve(jtj + lam * np.eye(len(x)), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            xn = np.clip(x + delta, lo, hi)
            rn = residual(xn)
            cn = float(rn @ rn)
            if cn < cost:
                x, r, cost = xn, rn, cn
                lam = max(lam / 6.0, 1e-12)
                improved = True
                break
            lam *= 8.0
        if not improved:
            break
    return x, cost
