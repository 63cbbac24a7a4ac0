"""Command-line interface.

Subcommands: ``solve``, ``cond-exact``, ``cond-sce``, ``backward-error``,
``reproduce``, ``overestimation``.  Matrices are exchanged in the plain-text
format of :mod:`tsylvester.matrixio`.  Exit codes: 0 on success, 2 when the
equation is not uniquely solvable, 3 on I/O or matrix-format errors.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .backward_error import mu_bar
from .conditioning import exact_conditions, sce_componentwise, sce_normwise
from .experiments import reproduce_tables, run_overestimation
from .linalg import rng_stream
from .matrixio import MatrixFormatError, format_matrix, read_matrix, write_matrix
from .solver import NotUniquelySolvableError, ProblemTriple, build_handle, solve

__all__ = ["main"]


def _triple(args) -> ProblemTriple:
    return ProblemTriple(
        a=read_matrix(args.a),
        b=read_matrix(args.b),
        c=read_matrix(args.c),
        sign=args.sign,
    )


def _solution(args, handle):
    if getattr(args, "solution", None):
        return read_matrix(args.solution)
    return solve(handle)


def _emit(payload) -> None:
    print(json.dumps(payload, indent=2))


def _cmd_solve(args) -> int:
    x = solve(build_handle(_triple(args)))
    if args.out:
        write_matrix(args.out, x)
    else:
        sys.stdout.write(format_matrix(x))
    return 0


def _cmd_cond_exact(args) -> int:
    problem = _triple(args)
    handle = build_handle(problem)
    x = _solution(args, handle)
    result = exact_conditions(problem, x, handle)
    _emit({
        "kappa": result.kappa,
        "m": result.m,
        "c": result.c,
        "componentwise_bound": result.componentwise_bound.tolist(),
    })
    return 0


def _cmd_cond_sce(args) -> int:
    problem = _triple(args)
    handle = build_handle(problem)
    x = _solution(args, handle)
    estimator = sce_normwise if args.mode == "normwise" else sce_componentwise
    est = estimator(handle, x, k=args.k, stream=rng_stream(args.seed))
    payload = {
        "mode": est.mode,
        "k": est.k,
        "omega_p": est.omega_p,
        "omega_k": est.omega_k,
        "abs_condition_matrix": est.abs_condition_matrix.tolist(),
        "rel_condition_matrix": est.rel_condition_matrix.tolist(),
    }
    if est.mode == "normwise":
        payload["kappa"] = est.kappa
    else:
        payload["m"] = est.m
        payload["c"] = est.c
    _emit(payload)
    return 0


def _cmd_backward_error(args) -> int:
    problem = _triple(args)
    y = read_matrix(args.y)
    report = mu_bar(problem, y)
    payload = {
        "residual_fro": float(np.linalg.norm(report.residual, "fro")),
        "eta_bound": report.eta_bound,
        "mu_bar": report.mu_bar,
        "finite": bool(np.isfinite(report.mu_bar)),
    }
    if report.delta_a is not None:
        payload["delta_fro"] = {
            "a": float(np.linalg.norm(report.delta_a, "fro")),
            "b": float(np.linalg.norm(report.delta_b, "fro")),
            "c": float(np.linalg.norm(report.delta_c, "fro")),
        }
    _emit(payload)
    return 0


def _cmd_reproduce(args) -> int:
    seeds = list(range(args.seed, args.seed + args.trials))
    reproduce_tables(args.table, seeds, out=args.out, k=args.k)
    print(f"wrote table {args.table} ({args.trials} trials per cell) to {args.out}")
    return 0


def _cmd_overestimation(args) -> int:
    summary = run_overestimation(
        example=args.example,
        samples=args.samples,
        epsilon=args.eps,
        seed=args.seed,
        n=args.n,
        m_param=args.m,
        k=args.k,
        out=args.out,
    )
    print(f"wrote {summary.samples - summary.skipped_samples} sample rows to {args.out}")
    print(f"mean overestimation: normwise {summary.mean_on:.4f}  "
          f"componentwise {summary.mean_oc:.4f}")
    print(f"variance:            normwise {summary.var_on:.4e}  "
          f"componentwise {summary.var_oc:.4e}")
    if args.plot:
        _plot_overestimation(summary, args.plot)
    return 0


def _plot_overestimation(summary, path) -> None:
    # plotting is best-effort; the CSV is the contract
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is not installed; skipping plot", file=sys.stderr)
        return
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    idx = np.arange(summary.entry_mean_on.size)
    ax1.plot(idx, summary.entry_mean_on, ".-")
    ax1.set_title("normwise estimator")
    ax2.plot(idx, summary.entry_mean_oc, ".-")
    ax2.set_title("componentwise estimator")
    for ax in (ax1, ax2):
        ax.set_xlabel("solution entry index (vec order)")
        ax.set_ylabel("mean overestimation")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    print(f"wrote plot to {path}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsylvester",
        description="Solve A X ± X^T B^T = C, estimate its conditioning, "
                    "and evaluate backward errors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_triple(p):
        p.add_argument("a", metavar="A", help="matrix file for A")
        p.add_argument("b", metavar="B", help="matrix file for B")
        p.add_argument("c", metavar="C", help="matrix file for C")
        p.add_argument("--sign", choices=("plus", "minus"), default="plus")

    p = sub.add_parser("solve", help="solve the equation for X")
    add_triple(p)
    p.add_argument("--out", help="write X to this file instead of stdout")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("cond-exact", help="exact condition numbers")
    add_triple(p)
    p.add_argument("--solution", help="matrix file with X (solved when omitted)")
    p.set_defaults(func=_cmd_cond_exact)

    p = sub.add_parser("cond-sce", help="small-sample condition estimate")
    add_triple(p)
    p.add_argument("--solution", help="matrix file with X (solved when omitted)")
    p.add_argument("--k", type=int, default=3, help="number of probe directions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("normwise", "componentwise"), default="normwise")
    p.set_defaults(func=_cmd_cond_sce)

    p = sub.add_parser("backward-error", help="backward errors of a computed solution")
    add_triple(p)
    p.add_argument("y", metavar="Y", help="matrix file for the computed solution")
    p.set_defaults(func=_cmd_backward_error)

    p = sub.add_parser("reproduce", help="benchmark tables over the random 2x2 family")
    p.add_argument("--table", type=int, choices=(1, 2, 4), required=True)
    p.add_argument("--trials", type=int, default=20, help="seeds per table cell")
    p.add_argument("--seed", type=int, default=0, help="first seed; trials use seed..seed+trials-1")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(func=_cmd_reproduce)

    p = sub.add_parser("overestimation", help="bound-to-error ratio statistics")
    p.add_argument("--example", type=int, choices=(2, 3), required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--n", type=int, default=40, help="dimension (example 3 only)")
    p.add_argument("--m", type=int, default=2, help="scale exponent (example 2 only)")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", help="optional PNG path for per-entry mean curves")
    p.set_defaults(func=_cmd_overestimation)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotUniquelySolvableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MatrixFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
