"""Command-line surface: scores, coverage, sweep, transpile, fidelity.

All commands are deterministic given --seed.  Exit codes: 0 success,
2 usage/config error, 3 computation failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coverage import (
    CANONICAL_BASES,
    build_coverage,
    build_joint_coverage,
    canonical_basis,
    coverage_cache_key,
    expected_k,
    load_coverage,
    save_coverage,
)
from .costs import best_basis_sweep, score_report
from .exceptions import BasisGateError
from .optimize import OptimizerConfig
from .speedlimit import LinearSpeedLimit, SquaredSpeedLimit, load_slf, normalize
from .transpile import (
    FidelityParams,
    TranspilerContext,
    fidelity,
    parse_circuit,
    schedule,
    transpile,
)

_FMT = "{:.6g}"


def _parse_slf(spec: str):
    if spec == "linear":
        return normalize(LinearSpeedLimit())
    if spec == "squared":
        return normalize(SquaredSpeedLimit())
    path = Path(spec)
    if not path.exists():
        raise SystemExit(2)
    return normalize(load_slf(path))


def _write_rows(rows, out: Path, fmt: str):
    out.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        out.write_text(json.dumps(rows, indent=2))
        return
    keys = list(rows[0].keys())
    with out.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    k: _FMT.format(v) if isinstance(v, float) else v
                    for k, v in row.items()
                }
            )


def _cached_coverage(name, parallel, args, slf):
    basis = canonical_basis(name, slf)
    cache_dir = Path(args.cache_dir)
    key = coverage_cache_key(basis, parallel, args.seed, args.n, args.kmax)
    path = cache_dir / f"coverage_{name}_{'par' if parallel else 'plain'}_{key}.json"
    if path.exists() and not args.no_cache:
        return load_coverage(path)
    cs = build_coverage(
        basis,
        parallel=parallel,
        k_max=args.kmax,
        n_random=args.n,
        seed=args.seed,
        vol_samples=args.vol_samples,
        workers=args.workers,
    )
    if not args.no_cache:
        cache_dir.mkdir(parents=True, exist_ok=True)
        save_coverage(cs, path)
    return cs


def cmd_scores(args) -> int:
    slf = _parse_slf(args.slf)
    rows = []
    for name in CANONICAL_BASES:
        cs = _cached_coverage(name, args.parallel, args, slf)
        rep = score_report(cs, slf, args.d1q, lam=args.lam, n_samples=args.vol_samples)
        rows.append(rep.as_row())
    out = Path(args.out or f"scores_{args.slf}.{args.format}")
    _write_rows(rows, out, args.format)
    print(f"wrote {out}")
    return 0


def cmd_coverage(args) -> int:
    slf = _parse_slf(args.slf)
    cs = _cached_coverage(args.basis, args.parallel, args, slf)
    out = Path(args.out or f"coverage_{args.basis}.json")
    save_coverage(cs, out)
    vertex_rows = []
    for lv in cs.levels:
        for side, poly in (("left", lv.left), ("right", lv.right)):
            if poly is None:
                continue
            for v in poly.vertices:
                vertex_rows.append(
                    {"k": lv.k, "side": side, "c1": v[0], "c2": v[1], "c3": v[2]}
                )
    _write_rows(vertex_rows, out.with_suffix(".vertices.csv"), "csv")
    print(f"wrote {out} and {out.with_suffix('.vertices.csv')}")
    for lv in cs.levels:
        print(f"k={lv.k}: haar volume {lv.volume:.4f}")
    return 0


def cmd_sweep(args) -> int:
    slf = _parse_slf(args.slf)
    ratios = np.linspace(0.0, 1.0, args.rays)
    angles = np.linspace(np.pi / 2 / args.angles, np.pi / 2, args.angles)
    grid = []
    for r in ratios:  # theta_g/theta_c from 0 (conversion only) to 1 (equal)
        for total in angles:
            th_c = total / (1.0 + r)
            grid.append((th_c, total - th_c))
    best_c, best_g, best_score, surface = best_basis_sweep(
        slf,
        args.d1q,
        args.metric,
        grid,
        seed=args.seed,
        n_random=args.n,
        vol_samples=args.vol_samples,
    )
    rows = [
        {"theta_c": c, "theta_g": g, "score": s if np.isfinite(s) else ""}
        for c, g, s in surface
    ]
    out = Path(args.out or f"sweep_{args.metric}.csv")
    _write_rows(rows, out, "csv")
    print(f"wrote {out}")
    print(f"best basis: theta_c={best_c:.6g} theta_g={best_g:.6g} score={best_score:.6g}")
    return 0


def cmd_transpile(args) -> int:
    slf = _parse_slf(args.slf)
    fp = FidelityParams(d_iswap=args.d_iswap, d_1q=args.d1q * args.d_iswap, t1=args.t1)
    iswap = canonical_basis("iswap", slf)
    sqiswap = canonical_basis("sqiswap", slf)
    baseline = _cached_coverage("sqiswap", False, args, slf)
    full = _cached_coverage("iswap", True, args, slf)
    frac = _cached_coverage("sqiswap", True, args, slf)
    joint = build_joint_coverage(
        full, frac, seed=args.seed, n_random=args.n, vol_samples=args.vol_samples,
        workers=args.workers,
    )
    ctx = TranspilerContext(
        iswap_basis=iswap, sqiswap_basis=sqiswap, joint=joint,
        baseline=baseline, fp=fp,
    )
    reports = {}
    for path in args.circuits:
        doc = json.loads(Path(path).read_text())
        circuit = parse_circuit(doc)
        _, _, report = transpile(circuit, ctx, seed=args.seed, comparison_runs=args.runs)
        reports[Path(path).name] = report
        imp = report["improvement"]["duration_pct"]
        print(
            f"{Path(path).name}: baseline {report['baseline']['pulses']:.2f} -> "
            f"optimized {report['optimized']['pulses']:.2f} pulses ({imp:.1f}%)"
        )
    out = Path(args.out or "transpile_report.json")
    out.write_text(json.dumps(reports, indent=2))
    print(f"wrote {out}")
    return 0


def cmd_fidelity(args) -> int:
    fp = FidelityParams(d_iswap=args.d_iswap, d_1q=args.d1q * args.d_iswap, t1=args.t1)
    doc = json.loads(Path(args.circuits[0]).read_text())
    circuit = parse_circuit(doc)
    durations = {"cx": 1.5, "cz": 1.5, "swap": 2.25, "iswap": 1.0, "rzz": 1.5, "canonical": 1.5}
    sched = schedule(circuit, basis_durations=durations, fp=fp)
    f_q, f_t = fidelity(sched, fp)
    report = {
        "makespan_ns": sched.makespan,
        "makespan_pulses": sched.makespan / fp.d_iswap,
        "f_q": f_q,
        "f_t": f_t,
    }
    out = Path(args.out or "fidelity_report.json")
    out.write_text(json.dumps(report, indent=2))
    print(f"wrote {out}")
    print(f"makespan {sched.makespan:.1f} ns, F_T = {f_t:.6f}")
    return 0


def _add_common(p):
    p.add_argument("--slf", default="linear", help="linear | squared | path/to/table.csv")
    p.add_argument("--d1q", type=float, default=0.25, help="1Q layer duration in pulses")
    p.add_argument("--lambda", dest="lam", type=float, default=0.47)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=3000, help="random template draws per level")
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--vol-samples", type=int, default=100_000)
    p.add_argument("--parallel", action="store_true", help="parallel-drive templates")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--cache-dir", default=".basisgate_cache")
    p.add_argument("--no-cache", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="basisgate",
        description="Select and evaluate two-qubit basis gates for driven couplers.",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scores", help="K and D score tables for the six bases")
    _add_common(p)
    p.set_defaults(func=cmd_scores)

    p = sub.add_parser("coverage", help="build one basis's coverage set")
    _add_common(p)
    p.add_argument("--basis", required=True, choices=sorted(CANONICAL_BASES))
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("sweep", help="best-basis surface over drive ratios")
    _add_common(p)
    p.add_argument("--metric", default="haar", choices=("haar", "cnot", "swap", "w"))
    p.add_argument("--rays", type=int, default=8)
    p.add_argument("--angles", type=int, default=8)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("transpile", help="decompose circuits, report durations")
    _add_common(p)
    p.add_argument("circuits", nargs="+")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--d-iswap", type=float, default=100.0, help="ns per full pulse")
    p.add_argument("--t1", type=float, default=100.0, help="qubit lifetime (us)")
    p.set_defaults(func=cmd_transpile)

    p = sub.add_parser("fidelity", help="schedule + decoherence score, no rewriting")
    _add_common(p)
    p.add_argument("circuits", nargs=1)
    p.add_argument("--d-iswap", type=float, default=100.0)
    p.add_argument("--t1", type=float, default=100.0)
    p.set_defaults(func=cmd_fidelity)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BasisGateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
