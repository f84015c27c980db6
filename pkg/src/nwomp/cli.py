"""Command-line front end.

Subcommands: ``matrix`` (generate and save a sensing matrix), ``guarantee``
(evaluate every closed-form bound for a saved matrix), ``recover`` (one OMP
run on saved matrix + measurements), and ``simulate`` (the Monte Carlo
experiments). Every run is deterministic given its flags; without ``--seed``
a fixed default (1234) is used, never the clock. Each output file gets a
sibling ``<file>.meta`` echoing the fully resolved configuration.

Exit codes: 0 success, 2 usage error, 3 I/O or file-format error,
4 numerical failure (rank-deficient least squares).
"""

import argparse
import sys

from . import experiments, guarantees, matrices, omp, signals
from ._text import FormatError, fmt_float, write_text

DEFAULT_SEED = 1234

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def _echo_meta(path, entries: dict) -> None:
    text = "\n".join("%s = %s" % (k, entries[k]) for k in entries) + "\n"
    write_text(str(path) + ".meta", text)


def _build_code(args):
    if args.family == "zc":
        return matrices.zadoff_chu(args.N), "zadoff-chu"
    if args.family == "random2bit":
        code = matrices.random_low_res_code(args.N, args.bits, args.seed)
        return code, "random %d-bit code" % args.bits
    if args.family == "ratio":
        if args.target_ratio is None:
            raise ValueError("--family ratio needs --target-ratio")
        code, achieved = matrices.search_code_by_norm_ratio(
            args.target_ratio, args.bits, args.M, args.N, args.attempts, args.seed
        )
        return code, "searched code, achieved ratio %s" % fmt_float(achieved)
    if args.code_file is None:
        raise ValueError("--family file needs --code-file")
    return matrices.load_code_text(args.code_file), "code from %s" % args.code_file


def cmd_matrix(args) -> int:
    if args.M >= args.N:
        raise ValueError("need M < N, got M=%d N=%d" % (args.M, args.N))
    code, note = _build_code(args)
    shift_seed = signals.child_seed(args.seed, experiments.STREAM_SHIFTS)
    matrix = matrices.build_cs_matrix(code, args.M, shift_seed)
    if args.format == "csv":
        matrices.save_matrix_csv(matrix, args.out)
    else:
        matrices.save_matrix_text(matrix, args.out)
    mu = matrices.mutual_coherence(matrix)
    _echo_meta(args.out, {
        "family": args.family, "N": args.N, "M": args.M, "seed": args.seed,
        "bits": args.bits, "format": args.format, "code": note,
        "mu": fmt_float(mu), "d_min": fmt_float(matrix.d_min),
        "d_max": fmt_float(matrix.d_max), "ratio": fmt_float(matrix.norm_ratio),
    })
    print(
        "matrix %dx%d (%s): mu=%.6f d_min=%.6f d_max=%.6f ratio=%.6f -> %s"
        % (args.M, args.N, note, mu, matrix.d_min, matrix.d_max,
           matrix.norm_ratio, args.out)
    )
    return EXIT_OK


def _load_matrix(path):
    if str(path).endswith(".csv"):
        return matrices.load_matrix_csv(path)
    return matrices.load_matrix_text(path)


def cmd_guarantee(args) -> int:
    matrix = _load_matrix(args.matrix)
    report = guarantees.full_report(
        matrix, k=args.k, sigma=args.sigma, alpha=args.alpha,
        rho_over_sigma=args.rho_over_sigma, x_min=args.x_min,
    )
    report.save(args.out, csv=args.csv)
    _echo_meta(args.out, {
        "matrix": args.matrix, "k": args.k, "sigma": fmt_float(args.sigma),
        "alpha": "none" if args.alpha is None else fmt_float(args.alpha),
        "rho_over_sigma": "none" if args.rho_over_sigma is None
        else fmt_float(args.rho_over_sigma),
        "x_min": "none" if args.x_min is None else fmt_float(args.x_min),
    })
    print("guarantee report (rho=%s) -> %s" % (fmt_float(report.rho), args.out))
    return EXIT_OK


def cmd_recover(args) -> int:
    matrix = _load_matrix(args.matrix)
    ms = signals.load_measurements_csv(args.measurements)
    trace = omp.omp_recover(matrix, ms.observations, args.k,
                            residual_tol=args.residual_tol)
    omp.save_trace_csv(trace, args.out_trace)
    estimate = signals.SparseSignal(
        matrix.n_cols, trace.selected_indices,
        trace.estimate[trace.selected_indices],
    )
    signals.save_signal_csv(estimate, args.out_estimate)
    _echo_meta(args.out_trace, {
        "matrix": args.matrix, "measurements": args.measurements, "k": args.k,
        "residual_tol": "none" if args.residual_tol is None
        else fmt_float(args.residual_tol),
    })
    print(
        "recovered support %s, final residual %s -> %s"
        % (sorted(trace.support), fmt_float(trace.residual_norms[-1]), args.out_trace)
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    overrides = {
        "experiment": args.kind, "trials": args.trials, "seed": args.seed,
        "sweep": args.sweep, "family": args.family,
        "target_ratio": args.target_ratio, "sigma": args.sigma,
    }
    cfg = experiments.load_config(args.config, overrides)
    result = experiments.run_experiment(cfg)
    result.save(args.out, args.metadata_out)
    print(
        "%s experiment: %d points x %d trials, matrix ratio %.4f -> %s"
        % (cfg.experiment, len(cfg.sweep), cfg.trials, result.norm_ratio, args.out)
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nwomp",
        description="Sparse recovery with norm-weighted OMP: matrices, "
        "guarantees, recovery, and Monte Carlo experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matrix", help="generate and save a sensing matrix")
    p.add_argument("--family", choices=("zc", "random2bit", "ratio", "file"), default="zc")
    p.add_argument("--N", type=int, default=32)
    p.add_argument("--M", type=int, default=20)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--bits", type=int, default=2)
    p.add_argument("--target-ratio", type=float, default=None)
    p.add_argument("--attempts", type=int, default=4000)
    p.add_argument("--code-file", default=None)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("guarantee", help="evaluate recovery guarantees for a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--rho-over-sigma", type=float, default=None)
    p.add_argument("--x-min", type=float, default=None)
    p.add_argument("--csv", action="store_true", help="write the report as CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_guarantee)

    p = sub.add_parser("recover", help="run one OMP recovery")
    p.add_argument("--matrix", required=True)
    p.add_argument("--measurements", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--residual-tol", type=float, default=None)
    p.add_argument("--out-trace", required=True)
    p.add_argument("--out-estimate", required=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    p.add_argument("kind", choices=("nmse", "support"))
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--metadata-out", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--sweep", default=None)
    p.add_argument("--family", default=None)
    p.add_argument("--target-ratio", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except omp.RankDeficiencyError as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL
    except (FormatError, OSError) as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
