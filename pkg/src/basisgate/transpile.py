"""Circuit model, basis decomposition, scheduling and the fidelity model.

The pipeline consolidates adjacent operations into two-qubit blocks,
rewrites each block into coupler pulses plus single-qubit gates (driven
substitution templates for the CNOT family, the iSWAP family and SWAP;
joint coverage lookup and a numerical template fit otherwise), merges
runs of single-qubit gates, schedules everything as soon as possible and
scores the result with the decoherence model

    F_Q = exp(-D[circuit] / T1),     F_T = prod_i F_Q(i).

Every decomposed block is verified against its unitary up to global
phase; synthesis failures abort with the block index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .coverage import BasisSpec, CoverageSet, JointCoverage, Template
from .exceptions import IncompleteCoverage, SchemaError, SynthesisFailure
from .gates import CNOT, CZ, ISWAP, SWAP, canonical, h as h_mat, rz as rz_mat, rzz as rzz_mat, sx as sx_mat, u3 as u3_mat
from .hamiltonian import ConversionGainParams, ParallelDriveParams, conversion_gain_unitary, parallel_drive_unitary
from .optimize import OptimizerConfig, least_squares_polish, nelder_mead
from .speedlimit import HALF_PI
from .weyl import (
    canonical_coordinate,
    canonical_coordinates_batch,
    haar_random_unitary4_batch,
    invariants_from_coordinate,
    makhlin_invariants_batch,
)

__all__ = [
    "FidelityParams",
    "GateOp",
    "Circuit",
    "Schedule",
    "TranspilerContext",
    "parse_circuit",
    "circuit_unitary_blocks",
    "decompose_2q",
    "consolidate_1q",
    "schedule",
    "fidelity",
    "transpile",
    "baseline_block_k",
]

PI = math.pi
_CLASS_TOL = 1e-7        # coordinate tolerance for template classification
_FIT_DISTANCE = 1e-5     # required operator distance, up to global phase

_ONE_QUBIT = {"rz": 1, "sx": 0, "h": 0, "u3": 3}
_TWO_QUBIT = {"cx": 0, "cz": 0, "swap": 0, "iswap": 0, "rzz": 1, "canonical": 3}


@dataclass(frozen=True)
class FidelityParams:
    """Hardware timing constants for the decoherence model (ns / us)."""

    d_iswap: float = 100.0   # ns per full iSWAP pulse
    d_1q: float = 25.0       # ns per 1Q gate layer
    t1: float = 100.0        # qubit lifetime, us

    def __post_init__(self):
        if min(self.d_iswap, self.d_1q, self.t1) <= 0:
            raise ValueError("fidelity parameters must be positive")

    @property
    def d_1q_pulses(self) -> float:
        return self.d_1q / self.d_iswap

    @property
    def t1_ns(self) -> float:
        return self.t1 * 1000.0


@dataclass
class GateOp:
    kind: str
    qubits: tuple
    params: tuple = ()
    pulse: object = None      # ConversionGainParams / ParallelDriveParams
    duration: float | None = None   # ns, filled by scheduling

    def matrix(self) -> np.ndarray:
        return _op_matrix(self)


@dataclass
class Circuit:
    n_qubits: int
    ops: list

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, [replace(op) for op in self.ops])


@dataclass
class Schedule:
    starts: list
    ends: list
    wire_duration: list      # ns per qubit
    makespan: float          # ns


def _op_matrix(op: GateOp) -> np.ndarray:
    kind = op.kind
    if kind == "rz":
        return rz_mat(op.params[0])
    if kind == "sx":
        return sx_mat()
    if kind == "h":
        return h_mat()
    if kind == "u3":
        return u3_mat(*op.params)
    if kind == "cx":
        return CNOT
    if kind == "cz":
        return CZ
    if kind == "swap":
        return SWAP
    if kind == "iswap":
        return ISWAP
    if kind == "rzz":
        return rzz_mat(op.params[0])
    if kind == "canonical":
        return canonical(*op.params)
    if kind == "basis_pulse":
        if isinstance(op.pulse, ParallelDriveParams):
            return parallel_drive_unitary(op.pulse)
        return conversion_gain_unitary(op.pulse)
    raise SchemaError(f"unknown gate kind {kind!r}")


def parse_circuit(doc: dict) -> Circuit:
    """Validate a circuit JSON document {"n": int, "ops": [...]}."""
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    n = doc.get("n")
    if not isinstance(n, int) or n < 1:
        raise SchemaError("positive integer required", path="n")
    raw_ops = doc.get("ops")
    if not isinstance(raw_ops, list):
        raise SchemaError("list required", path="ops")
    ops = []
    for i, item in enumerate(raw_ops):
        path = f"ops[{i}]"
        if not isinstance(item, dict):
            raise SchemaError("op must be an object", path=path)
        g = item.get("g")
        if g in _ONE_QUBIT:
            arity, n_params = 1, _ONE_QUBIT[g]
        elif g in _TWO_QUBIT:
            arity, n_params = 2, _TWO_QUBIT[g]
        else:
            raise SchemaError(f"unknown gate name {g!r}", path=f"{path}.g")
        q = item.get("q")
        if (
            not isinstance(q, list)
            or len(q) != arity
            or not all(isinstance(v, int) and 0 <= v < n for v in q)
        ):
            raise SchemaError(
                f"{g} needs {arity} qubit index(es) below {n}", path=f"{path}.q"
            )
        if arity == 2 and q[0] == q[1]:
            raise SchemaError("2Q op needs distinct qubits", path=f"{path}.q")
        p = item.get("p", [])
        if not isinstance(p, list) or len(p) != n_params:
            raise SchemaError(f"{g} takes {n_params} parameter(s)", path=f"{path}.p")
        params = tuple(float(v) for v in p)
        if g == "canonical":
            from .weyl import in_weyl_chamber

            if not in_weyl_chamber(np.array(params)):
                raise SchemaError(
                    "canonical coordinates outside the fundamental domain",
                    path=f"{path}.p",
                )
        ops.append(GateOp(kind=g, qubits=tuple(q), params=params))
    return Circuit(n_qubits=n, ops=ops)


# ---------------------------------------------------------------------------
# block consolidation


@dataclass
class _Block:
    pair: tuple
    ops: list = field(default_factory=list)

    def matrix(self) -> np.ndarray:
        a, b = self.pair
        u = np.eye(4, dtype=complex)
        for op in self.ops:
            m = op.matrix()
            if len(op.qubits) == 1:
                q = op.qubits[0]
                m4 = np.kron(m, np.eye(2)) if q == a else np.kron(np.eye(2), m)
            else:
                qa, qb = op.qubits
                m4 = m if (qa, qb) == (a, b) else SWAP @ m @ SWAP
            u = m4 @ u
        return u


def circuit_unitary_blocks(circuit: Circuit):
    """Greedy adjacent-run consolidation into 2Q blocks.

    Returns an ordered list of items: ("block", _Block) for runs touching
    a 2Q gate, ("op", GateOp) for leftover 1Q gates on otherwise idle
    wires.  Per-qubit op order is preserved.
    """
    items = []
    open_blocks: dict = {}
    owner: dict = {}
    pending: dict = {q: [] for q in range(circuit.n_qubits)}

    def close(pair):
        blk = open_blocks.pop(pair)
        for q in pair:
            owner.pop(q, None)
        items.append(("block", blk))

    for op in circuit.ops:
        if len(op.qubits) == 1:
            q = op.qubits[0]
            if q in owner:
                open_blocks[owner[q]].ops.append(op)
            else:
                pending[q].append(op)
            continue
        qa, qb = op.qubits
        pair = (min(qa, qb), max(qa, qb))
        if owner.get(qa) == pair and owner.get(qb) == pair:
            open_blocks[pair].ops.append(op)
            continue
        for q in (qa, qb):
            if q in owner:
                close(owner[q])
        blk = _Block(pair=pair)
        blk.ops.extend(pending[pair[0]])
        blk.ops.extend(pending[pair[1]])
        pending[pair[0]] = []
        pending[pair[1]] = []
        blk.ops.append(op)
        open_blocks[pair] = blk
        owner[qa] = owner[qb] = pair
    for pair in list(open_blocks):
        close(pair)
    for q in range(circuit.n_qubits):
        for op in pending[q]:
            items.append(("op", op))
    return items


# ---------------------------------------------------------------------------
# single-qubit factor extraction and exterior fitting


def _factor_product_gate(u: np.ndarray):
    """Split a (near-)product two-qubit unitary into 1Q factors.

    Returns (u0, u1) with u ~ u0 x u1 up to global phase, or None if u is
    not a product gate.
    """
    # partial-trace style extraction: the 2x2 blocks of a product gate
    # are all proportional to u1
    best = None
    for i in range(2):
        for j in range(2):
            blk = u[2 * i: 2 * i + 2, 2 * j: 2 * j + 2]
            w = np.linalg.norm(blk)
            if best is None or w > best[0]:
                best = (w, i, j, blk)
    _, i0, j0, blk = best
    u1 = blk / np.sqrt(abs(np.linalg.det(blk))) if abs(np.linalg.det(blk)) > 1e-20 else None
    if u1 is None:
        return None
    u0 = np.empty((2, 2), dtype=complex)
    inv = np.linalg.inv(u1)
    for i in range(2):
        for j in range(2):
            blk = u[2 * i: 2 * i + 2, 2 * j: 2 * j + 2]
            coef = np.trace(inv @ blk) / 2.0
            u0[i, j] = coef
    # orthonormalize the factor in case of mild noise
    q, r = np.linalg.qr(u0)
    u0 = q * (np.diagonal(r) / np.abs(np.diagonal(r)))[None, :]
    approx = np.kron(u0, u1)
    if _phase_insensitive_distance(u, approx) > 1e-6:
        return None
    return u0, u1


def _phase_insensitive_distance(a: np.ndarray, b: np.ndarray) -> float:
    tr = np.trace(a.conj().T @ b)
    return float(np.sqrt(max(0.0, 2 * a.shape[0] - 2 * abs(tr))))


def _spectral_phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    tr = np.trace(a.conj().T @ b)
    phase = tr / abs(tr) if abs(tr) > 1e-12 else 1.0
    return float(np.linalg.norm(a - phase * b, ord=2))


def _u3_angles(m: np.ndarray):
    """Euler angles (theta, phi, lam) with m ~ u3(theta, phi, lam)."""
    m = m / np.sqrt(np.linalg.det(m).astype(complex))
    theta = 2.0 * math.atan2(abs(m[1, 0]), abs(m[0, 0]))
    if abs(m[1, 0]) < 1e-12:
        return (0.0, 0.0, float(np.angle(m[1, 1] / m[0, 0])))
    if abs(m[0, 0]) < 1e-12:
        return (PI, 0.0, float(np.angle(-m[1, 0] / m[0, 1])))
    phi = float(np.angle(m[1, 0] / m[0, 0]))
    lam = float(np.angle(-m[0, 1] / m[0, 0]))
    return (float(theta), phi, lam)


def _fit_exterior_locals(target: np.ndarray, core: np.ndarray, rng, n_restarts=12):
    """Locals (a0, a1, b0, b1) with target ~ (a0 x a1) core (b0 x b1).

    Nelder-Mead over 12 Euler angles, then damped least squares on the
    phase-aligned residual.  Returns (angles, distance).
    """

    def assemble(x):
        a = np.kron(u3_mat(*x[0:3]), u3_mat(*x[3:6]))
        b = np.kron(u3_mat(*x[6:9]), u3_mat(*x[9:12]))
        return a @ core @ b

    def loss(x):
        m = assemble(x)
        tr = np.trace(target.conj().T @ m)
        return 8.0 - 2.0 * abs(tr)

    def residual(x):
        m = assemble(x)
        tr = np.trace(target.conj().T @ m)
        phase = tr / abs(tr) if abs(tr) > 1e-12 else 1.0
        d = target - phase * m
        return np.concatenate([d.real.ravel(), d.imag.ravel()])

    cfg = OptimizerConfig(max_iters=400, loss_tol=1e-10, adaptive=True)
    best_x, best_f = None, np.inf
    for _ in range(n_restarts):
        x0 = rng.uniform(0, 2 * PI, 12)
        res = nelder_mead(loss, x0, cfg)
        x, f = res.x, res.fun
        if f < 1e-1:
            x, f2 = least_squares_polish(residual, x, (0.0, 2 * PI))
            f = f2
        if f < best_f:
            best_x, best_f = x, f
        if best_f < 1e-14:
            break
    dist = math.sqrt(max(best_f, 0.0))
    return best_x, dist


def _fit_template_to_invariants(tpl: Template, target_inv, rng, seeds=(), n_restarts=8,
                                max_iters=500):
    """Template parameters whose class matches the target invariants."""
    target_inv = np.asarray(target_inv, dtype=float)

    def loss(x):
        g = makhlin_invariants_batch(tpl.unitaries(x[None, :]))[0]
        return float(np.sum((g - target_inv) ** 2))

    def residual(x):
        g = makhlin_invariants_batch(tpl.unitaries(x[None, :]))[0]
        return g - target_inv

    cfg = OptimizerConfig(max_iters=max_iters, loss_tol=1e-10, adaptive=True)
    best_x, best_f = None, np.inf
    starts = [np.asarray(s, dtype=float) for s in seeds]
    while len(starts) < n_restarts:
        starts.append(rng.uniform(0, 2 * PI, tpl.n_params))
    for x0 in starts:
        res = nelder_mead(loss, x0, cfg)
        x, f = res.x, res.fun
        if f < 1e-2:
            x, f = least_squares_polish(residual, x, cfg.param_bounds, tol=1e-24)
        if f < best_f:
            best_x, best_f = x, f
        if best_f < 1e-20:
            break
    return best_x, best_f


# ---------------------------------------------------------------------------
# block decomposition


@dataclass
class TranspilerContext:
    """Everything the rewriter needs: bases, coverage, timing."""

    iswap_basis: BasisSpec
    sqiswap_basis: BasisSpec
    joint: JointCoverage | None
    baseline: CoverageSet | None
    fp: FidelityParams = field(default_factory=FidelityParams)
    synth_restarts: int = 8
    synth_iters: int = 600

    def d_1q(self) -> float:
        return self.fp.d_1q_pulses


def _conv_block(t: float, min_steps: int = 2) -> BasisSpec:
    """A conversion-only pulse of duration t at the normalized speed limit."""
    steps = max(min_steps, round(t / 0.25))
    return BasisSpec(
        label=f"conv_{t:.6f}", theta_c=HALF_PI * t, theta_g=0.0,
        g_c=HALF_PI, g_g=0.0, t=t, steps=steps,
    )


def decompose_2q(
    target,
    ctx: TranspilerContext,
    rng: np.random.Generator,
    pair=(0, 1),
):
    """Rewrite one block into pulses and 1Q gates.

    target: a 4x4 unitary (full semantic fit) or a bare coordinate
    (duration-only planning).  Returns (ops, twoq_time, n_layers,
    distance, optimal) where distance is the final operator error (NaN
    when only a coordinate was given) and optimal marks results that no
    rerun could improve (fixed template, or cheapest covering combo).
    """
    if isinstance(target, np.ndarray) and target.shape == (4, 4):
        u_target = target
        coord = canonical_coordinate(target).as_array()
    else:
        u_target = None
        coord = np.asarray(target, dtype=float).reshape(3)
    c1, c2, c3 = coord

    # identity class: locals only
    if np.linalg.norm(coord) <= _CLASS_TOL:
        if u_target is None:
            return [], 0.0, 1, math.nan, True
        factors = _factor_product_gate(u_target)
        if factors is None:
            raise SynthesisFailure("identity-class block failed to factor")
        u0, u1 = factors
        ops = [
            GateOp(kind="u3", qubits=(pair[0],), params=_u3_angles(u0)),
            GateOp(kind="u3", qubits=(pair[1],), params=_u3_angles(u1)),
        ]
        dist = _spectral_phase_distance(u_target, np.kron(u0, u1))
        return ops, 0.0, 1, dist, True

    # iSWAP family (c, c, 0): one fractional conversion pulse, no drive
    if abs(c1 - c2) <= _CLASS_TOL and c3 <= _CLASS_TOL:
        blk = _conv_block(c1 / HALF_PI)
        pulse = ConversionGainParams(g_c=blk.g_c, g_g=0.0, t=blk.t)
        core = conversion_gain_unitary(pulse)
        return (
            *_finish_block(u_target, core, [_pulse_op(pulse, pair)], blk.t, 2, ctx, rng, pair),
            True,
        )

    # CNOT family (c, 0, 0): one driven conversion pulse of the same fraction
    if c2 <= _CLASS_TOL and c3 <= _CLASS_TOL:
        t = c1 / HALF_PI
        blk = _conv_block(t)
        tpl = Template([blk], parallel=True)
        seeds = _cnot_seeds(tpl, blk)
        x, loss = _fit_template_to_invariants(
            tpl, invariants_from_coordinate(coord), rng, seeds=seeds,
            n_restarts=ctx.synth_restarts, max_iters=ctx.synth_iters,
        )
        if loss > 1e-10:
            raise SynthesisFailure("driven CNOT-family fit failed", best_loss=loss)
        pulse = _template_pulses(tpl, x)[0]
        core = tpl.unitary(x)
        return (
            *_finish_block(u_target, core, [_pulse_op(pulse, pair)], t, 2, ctx, rng, pair),
            True,
        )

    # SWAP: driven full iSWAP + fractional block (interior layer kept)
    if np.linalg.norm(coord - np.array([HALF_PI, HALF_PI, HALF_PI])) <= _CLASS_TOL:
        tpl = Template([ctx.iswap_basis, ctx.sqiswap_basis], parallel=True)
        seeds = _swap_seeds(tpl)
        x, loss = _fit_template_to_invariants(
            tpl, invariants_from_coordinate(coord), rng, seeds=seeds,
            n_restarts=ctx.synth_restarts, max_iters=ctx.synth_iters,
        )
        if loss > 1e-10:
            raise SynthesisFailure("SWAP template fit failed", best_loss=loss)
        return (*_emit_template(u_target, tpl, x, ctx, rng, pair), True)

    # generic: cheapest covering joint combination, escalate on fit failure
    if ctx.joint is None:
        raise IncompleteCoverage("generic decomposition needs a joint coverage set")
    combos = sorted(ctx.joint.combos, key=lambda c: c.duration(ctx.d_1q()))
    best_loss = np.inf
    first_covering = True
    for combo in combos:
        if not combo.level.contains(coord, tol=1e-8):
            continue
        blocks = [ctx.iswap_basis] * combo.m + [ctx.sqiswap_basis] * combo.n
        tpl = Template(blocks, parallel=True)
        x, loss = _fit_template_to_invariants(
            tpl, invariants_from_coordinate(coord), rng,
            n_restarts=ctx.synth_restarts, max_iters=ctx.synth_iters,
        )
        best_loss = min(best_loss, loss)
        if loss <= 1e-10:
            return (*_emit_template(u_target, tpl, x, ctx, rng, pair), first_covering)
        first_covering = False
    raise SynthesisFailure("no covering template fit the block", best_loss=best_loss)


def _cnot_seeds(tpl: Template, blk: BasisSpec):
    base = np.zeros(tpl.n_params)
    seeds = []
    for eps in (3.0, 1.5, 4.5):
        for which in (0, 1):
            x = base.copy()
            lo, hi = tpl.slices[0]["eps"]
            n = blk.n_steps
            x[lo + which * n: lo + (which + 1) * n] = eps
            seeds.append(x)
    return seeds[:4]


def _swap_seeds(tpl: Template):
    x = np.zeros(tpl.n_params)
    lo, hi = tpl.slices[0]["eps"]
    x[lo:hi] = PI
    return [x]


def _pulse_op(pulse, pair) -> GateOp:
    return GateOp(kind="basis_pulse", qubits=tuple(pair), pulse=pulse)


def _template_pulses(tpl: Template, x: np.ndarray):
    pulses = []
    for i, blk in enumerate(tpl.blocks):
        s = tpl.slices[i]
        pc, pg = x[s["phis"][0]:s["phis"][1]]
        base = ConversionGainParams(g_c=blk.g_c, g_g=blk.g_g, phi_c=pc, phi_g=pg, t=blk.t)
        if tpl.parallel:
            lo, hi = s["eps"]
            eps = x[lo:hi].reshape(2, blk.n_steps)
            pulses.append(ParallelDriveParams(base=base, eps1=tuple(eps[0]), eps2=tuple(eps[1])))
        else:
            pulses.append(base)
    return pulses


def _emit_template(u_target, tpl: Template, x, ctx, rng, pair):
    pulses = _template_pulses(tpl, x)
    ops = []
    for i, pulse in enumerate(pulses):
        ops.append(_pulse_op(pulse, pair))
        s = tpl.slices[i]
        if "junction" in s:
            lo, _ = s["junction"]
            ops.append(GateOp(kind="u3", qubits=(pair[0],), params=tuple(x[lo:lo + 3])))
            ops.append(GateOp(kind="u3", qubits=(pair[1],), params=tuple(x[lo + 3:lo + 6])))
    core = tpl.unitary(x)
    n_layers = len(tpl.blocks) + 1
    return _finish_block(u_target, core, ops, tpl.twoq_time, n_layers, ctx, rng, pair)


def _finish_block(u_target, core, core_ops, twoq_time, n_layers, ctx, rng, pair):
    """Attach exterior locals (when a full unitary target is given)."""
    _assert_resource_floor(core, twoq_time)
    if u_target is None:
        return core_ops, twoq_time, n_layers, math.nan
    angles, dist = _fit_exterior_locals(u_target, core, rng, n_restarts=ctx.synth_restarts + 4)
    if dist > _FIT_DISTANCE:
        raise SynthesisFailure("exterior 1Q fit failed", best_loss=dist)
    pre = [
        GateOp(kind="u3", qubits=(pair[0],), params=tuple(angles[6:9])),
        GateOp(kind="u3", qubits=(pair[1],), params=tuple(angles[9:12])),
    ]
    post = [
        GateOp(kind="u3", qubits=(pair[0],), params=tuple(angles[0:3])),
        GateOp(kind="u3", qubits=(pair[1],), params=tuple(angles[3:6])),
    ]
    ops = pre + core_ops + post
    full = _ops_product(ops, pair)
    sdist = _spectral_phase_distance(u_target, full)
    if sdist > _FIT_DISTANCE:
        raise SynthesisFailure("decomposed block failed verification", best_loss=sdist)
    return ops, twoq_time, n_layers, sdist


def _assert_resource_floor(core, twoq_time):
    coord = canonical_coordinate(core).as_array()
    if np.linalg.norm(coord - np.array([HALF_PI, 0, 0])) <= 1e-6:
        assert twoq_time >= 1.0 - 1e-9, "CNOT class needs >= 1 pulse of 2Q time"
    if np.linalg.norm(coord - np.array([HALF_PI, HALF_PI, HALF_PI])) <= 1e-6:
        assert twoq_time >= 1.5 - 1e-9, "SWAP class needs >= 1.5 pulses of 2Q time"


def _ops_product(ops, pair):
    u = np.eye(4, dtype=complex)
    a, b = pair
    for op in ops:
        m = op.matrix()
        if len(op.qubits) == 1:
            m = np.kron(m, np.eye(2)) if op.qubits[0] == a else np.kron(np.eye(2), m)
        elif op.qubits != (a, b):
            m = SWAP @ m @ SWAP
        u = m @ u
    return u


# ---------------------------------------------------------------------------
# 1Q consolidation, scheduling, fidelity


def consolidate_1q(circuit: Circuit) -> Circuit:
    """Merge runs of adjacent 1Q gates into single u3s, drop identities."""
    out: list = []
    pending: dict = {}

    def flush(q):
        m = pending.pop(q, None)
        if m is None:
            return
        if _phase_insensitive_distance(m, np.eye(2)) <= 1e-9:
            return
        out.append(GateOp(kind="u3", qubits=(q,), params=_u3_angles(m)))

    for op in circuit.ops:
        if len(op.qubits) == 1:
            q = op.qubits[0]
            pending[q] = op.matrix() @ pending.get(q, np.eye(2, dtype=complex))
        else:
            for q in op.qubits:
                flush(q)
            out.append(op)
    for q in sorted(pending):
        flush(q)
    return Circuit(circuit.n_qubits, out)


def _op_duration_ns(op: GateOp, fp: FidelityParams, basis_durations) -> float:
    if len(op.qubits) == 1:
        return fp.d_1q
    if op.kind == "basis_pulse":
        t = op.pulse.base.t if isinstance(op.pulse, ParallelDriveParams) else op.pulse.t
        return t * fp.d_iswap
    if op.kind == "block_pulse":
        return op.params[0] * fp.d_iswap
    if basis_durations and op.kind in basis_durations:
        return basis_durations[op.kind] * fp.d_iswap
    raise ValueError(f"no duration rule for 2Q op {op.kind!r}")


def schedule(circuit: Circuit, basis_durations=None, fp: FidelityParams = FidelityParams()) -> Schedule:
    """As-soon-as-possible schedule; wire duration is the makespan.

    Idle qubits decohere too, so every wire is charged the full critical
    path.
    """
    free = [0.0] * circuit.n_qubits
    starts, ends = [], []
    for op in circuit.ops:
        dur = _op_duration_ns(op, fp, basis_durations)
        start = max(free[q] for q in op.qubits)
        end = start + dur
        for q in op.qubits:
            free[q] = end
        op.duration = dur
        starts.append(start)
        ends.append(end)
    makespan = max(ends) if ends else 0.0
    return Schedule(
        starts=starts,
        ends=ends,
        wire_duration=[makespan] * circuit.n_qubits,
        makespan=makespan,
    )


def fidelity(s: Schedule, fp: FidelityParams = FidelityParams()):
    """Per-qubit decay F_Q = exp(-D/T1) and total F_T = prod F_Q."""
    f_q = [math.exp(-d / fp.t1_ns) for d in s.wire_duration]
    f_t = math.prod(f_q)
    return f_q, f_t


# ---------------------------------------------------------------------------
# full pipeline


def baseline_block_k(coord: np.ndarray, baseline: CoverageSet | None) -> int:
    """Analytic sqrt(iSWAP) rules: CNOT family 2, SWAP 3, lookup otherwise."""
    c1, c2, c3 = coord
    if np.linalg.norm(coord) <= _CLASS_TOL:
        return 0
    if np.linalg.norm(coord - np.array([HALF_PI, HALF_PI, HALF_PI])) <= _CLASS_TOL:
        return 3
    if c2 <= _CLASS_TOL and c3 <= _CLASS_TOL:
        return 2
    if abs(c1 - PI / 4) <= _CLASS_TOL and abs(c2 - PI / 4) <= _CLASS_TOL and c3 <= _CLASS_TOL:
        return 1
    if baseline is None:
        raise IncompleteCoverage("generic baseline needs the sqiswap coverage set")
    k = baseline.min_k(coord)
    if k is None:
        raise IncompleteCoverage("baseline coverage incomplete for block")
    return k


def transpile(
    circuit: Circuit,
    ctx: TranspilerContext,
    seed: int = 0,
    comparison_runs: int = 10,
):
    """Decompose, schedule and score a circuit; baseline vs optimized.

    The optimizer is re-run comparison_runs times with spawned seeds and
    the shortest resulting schedule is kept.
    """
    items = circuit_unitary_blocks(circuit)
    fp = ctx.fp
    d1q = ctx.d_1q()

    # baseline: analytic per-block durations, Eq-style counting
    baseline_circuit = Circuit(circuit.n_qubits, [])
    for kind, payload in items:
        if kind == "op":
            baseline_circuit.ops.append(replace(payload))
            continue
        blk = payload
        coord = canonical_coordinate(blk.matrix()).as_array()
        k = baseline_block_k(coord, ctx.baseline)
        dur = k * ctx.sqiswap_basis.t + (k + 1) * d1q
        baseline_circuit.ops.append(
            GateOp(kind="block_pulse", qubits=blk.pair, params=(dur,))
        )
    baseline_sched = schedule(baseline_circuit, fp=fp)
    base_fq, base_ft = fidelity(baseline_sched, fp)

    master = np.random.SeedSequence([seed, 0x7A5])
    best = None
    # blocks whose cheapest-possible template already converged are kept
    # across comparison runs; reruns only retry improvable blocks
    cache: dict = {}
    for run_seq in master.spawn(max(1, comparison_runs)):
        rng = np.random.default_rng(run_seq)
        ops_out: list = []
        max_dist = 0.0
        for kind, payload in items:
            if kind == "op":
                ops_out.append(replace(payload))
                continue
            blk = payload
            u = blk.matrix()
            key = u.round(10).tobytes()
            if key in cache:
                ops, dist = cache[key]
            else:
                ops, _, _, dist, optimal = decompose_2q(u, ctx, rng, pair=(0, 1))
                if optimal:
                    cache[key] = (ops, dist)
            max_dist = max(max_dist, dist if math.isfinite(dist) else 0.0)
            ops_out.extend(_remap_ops(ops, blk.pair))
        opt_circuit = consolidate_1q(Circuit(circuit.n_qubits, ops_out))
        opt_sched = schedule(opt_circuit, fp=fp)
        if best is None or opt_sched.makespan < best[1].makespan:
            best = (opt_circuit, opt_sched, max_dist)
    opt_circuit, opt_sched, max_dist = best
    opt_fq, opt_ft = fidelity(opt_sched, fp)

    def block_report(sched, fq, ft):
        return {
            "pulses": sched.makespan / fp.d_iswap,
            "ns": sched.makespan,
            "f_q": fq,
            "f_t": ft,
            "infidelity": 1.0 - ft,
        }

    report = {
        "n_qubits": circuit.n_qubits,
        "n_blocks": sum(1 for kind, _ in items if kind == "block"),
        "baseline": block_report(baseline_sched, base_fq, base_ft),
        "optimized": block_report(opt_sched, opt_fq, opt_ft),
        "max_block_distance": max_dist,
    }
    b, o = report["baseline"], report["optimized"]
    report["improvement"] = {
        "duration_pct": _pct(b["pulses"], o["pulses"]),
        "f_t_pct": _pct(b["infidelity"], o["infidelity"]),
    }
    return opt_circuit, opt_sched, report


def _pct(before: float, after: float) -> float:
    if before == 0:
        return 0.0
    return 100.0 * (before - after) / before


def _remap_ops(ops, pair):
    out = []
    for op in ops:
        qubits = tuple(pair[q] for q in op.qubits)
        out.append(replace(op, qubits=qubits))
    return out


def haar_mean_infidelity_improvement(
    ctx: TranspilerContext, n_targets: int = 1000, seed: int = 7
) -> dict:
    """Mean two-qubit infidelity, baseline vs joint-optimized durations."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xF1D]))
    us = haar_random_unitary4_batch(rng, n_targets)
    coords = canonical_coordinates_batch(us)
    fp = ctx.fp
    d1q = ctx.d_1q()

    ks = np.array([baseline_block_k(c, ctx.baseline) for c in coords], dtype=float)
    base_d = ks * ctx.sqiswap_basis.t + (ks + 1) * d1q
    opt_d, _ = ctx.joint.min_durations_batch(coords, d1q)
    if not np.all(np.isfinite(opt_d)):
        raise IncompleteCoverage("joint coverage misses some Haar targets")

    def infid(d_pulses):
        return 1.0 - np.exp(-2.0 * d_pulses * fp.d_iswap / fp.t1_ns)

    b = float(infid(base_d).mean())
    o = float(infid(opt_d).mean())
    return {
        "baseline": b,
        "optimized": o,
        "improvement_pct": _pct(b, o),
        "baseline_duration": float(base_d.mean()),
        "optimized_duration": float(opt_d.mean()),
    }
