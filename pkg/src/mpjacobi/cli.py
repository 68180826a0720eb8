"""Command-line experiment harness and one-shot solver."""

from __future__ import annotations

import argparse
import sys
import warnings

from . import experiments, matio
from .jacobi import JacobiConvergenceError, NotPositiveDefiniteError
from .precond import PRECOND_METHODS
from .solver import VARIANTS, SolveConfig, solve

DESK_SIZES = [10, 18, 32, 56, 100]
FULL_SIZES = [10, 17, 28, 46, 77, 129, 215, 359, 599, 1000]
DESK_KAPPAS = [1e2, 1e4, 1e6, 1e8, 1e10]
FULL_KAPPAS = [1e1, 1e2, 1e4, 1e6, 1e8, 1e10, 1e12, 1e14, 1e16]
DESK_COND_KAPPAS = [1e2, 1e4, 1e6, 1e8, 1e10]
FULL_COND_KAPPAS = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _str_list(text: str) -> list[str]:
    return [t for t in text.split(",") if t]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=1, help="base RNG seed")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--full", action="store_true",
                   help="run the full paper-scale grid (slow; see README)")
    p.add_argument("--float-format", choices=("hex", "dec"), default="hex",
                   help="CSV numeric encoding (hex-float is normative)")
    p.add_argument("--workers", type=int, default=1,
                   help="bounded worker pool size; output order is unaffected")
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock times (breaks byte reproducibility)")
    p.add_argument("--no-plot", action="store_true",
                   help="skip rendering the companion figure")


def _figure_path(out_csv: str) -> str:
    base = out_csv[:-4] if out_csv.endswith(".csv") else out_csv
    return base + ".png"


def _run_and_write(tasks, args) -> list:
    records = experiments.run_tasks(tasks, workers=args.workers)
    experiments.write_records(records, args.out, args.float_format)
    return records


def _cmd_off(args) -> int:
    sizes = args.n if args.n is not None else (FULL_SIZES if args.full else DESK_SIZES)
    tasks = experiments.off_experiment(
        sizes, args.kappa, args.mode, args.precond, args.seed,
        timing=args.timing,
    )
    _run_and_write(tasks, args)
    if not args.no_plot:
        from . import plots

        plots.render_off_figure(args.out, _figure_path(args.out))
    return 0


def _cmd_fwd_vs_kappa(args) -> int:
    kappas = args.kappa if args.kappa is not None else (
        FULL_KAPPAS if args.full else DESK_KAPPAS
    )
    tasks = experiments.fwd_vs_kappa(
        args.n, kappas, args.mode, args.variant, args.seed,
        precond_method=args.precond, timing=args.timing,
    )
    _run_and_write(tasks, args)
    if not args.no_plot:
        from . import plots

        plots.render_fwd_figure(args.out, _figure_path(args.out), "kappa_target")
    return 0


def _cmd_fwd_vs_n(args) -> int:
    sizes = args.n if args.n is not None else (FULL_SIZES if args.full else DESK_SIZES)
    tasks = experiments.fwd_vs_n(
        sizes, args.kappa, args.mode, args.variant, args.seed,
        precond_method=args.precond, timing=args.timing,
    )
    _run_and_write(tasks, args)
    if not args.no_plot:
        from . import plots

        plots.render_fwd_figure(args.out, _figure_path(args.out), "n")
    return 0


def _cmd_cond_reduction(args) -> int:
    kappas = args.kappa if args.kappa is not None else (
        FULL_COND_KAPPAS if args.full else DESK_COND_KAPPAS
    )
    specials = args.specials
    if specials is None:
        specials = ["pascal15", "hilbert20"]
        if args.full:
            specials += ["invhilbert20", "lauchli500"]
    notices: list[str] = []
    tasks = experiments.cond_reduction(
        args.n, kappas, args.mode, args.seed, precond_method=args.precond,
        specials=specials, matrix_files=args.matrix_file, timing=args.timing,
        notices=notices,
    )
    for note in notices:
        print(note, file=sys.stderr)
    _run_and_write(tasks, args)
    if not args.no_plot:
        from . import plots

        plots.render_cond_figure(args.out, _figure_path(args.out))
    return 0


def _cmd_solve(args) -> int:
    try:
        A = matio.load_matrix(args.matrix_file)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cfg = SolveConfig(variant=args.variant, precond_method=args.precond)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = solve(A, cfg)
    except NotPositiveDefiniteError as exc:
        print(f"error: matrix is not positive definite: {exc}", file=sys.stderr)
        return 3
    except (JacobiConvergenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    lines = [repr(float(v)) for v in result.lambda_]
    d = result.diagnostics
    diag_lines = [
        f"# variant={args.variant} precond={args.precond}",
        f"# sweeps={result.report.sweeps} "
        f"rotations={result.report.rotations_applied} "
        f"converged={result.report.converged}",
        f"# scale_exponent={d.scale_exponent}",
    ]
    if d.off_ratio is not None:
        diag_lines.append(f"# off_ratio={d.off_ratio:.6e} theta={d.theta:.6e}")
    if d.a1 is not None:
        diag_lines.append(f"# assumptions: A1={d.a1} A2={d.a2} A3={d.a3}")
    if d.underflow_warned:
        diag_lines.append("# warning: underflow during demotion")
    for w in caught:
        diag_lines.append(f"# warning: {w.message}")
    text = "\n".join(diag_lines + lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if args.vectors_out:
        matio.save_matrix(args.vectors_out, result.Q)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpjacobi",
        description="Mixed-precision preconditioned Jacobi eigensolver "
                    "experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("off-experiment",
                       help="off-quantity of the preconditioned matrix vs n")
    p.add_argument("--n", type=_int_list, default=None,
                   help="comma-separated matrix sizes")
    p.add_argument("--kappa", type=float, default=1e6)
    p.add_argument("--mode", type=_int_list, default=[1, 2, 3, 4, 5])
    p.add_argument("--precond", type=_str_list,
                   default=list(PRECOND_METHODS),
                   help="comma-separated preconditioner methods")
    _add_common(p)
    p.set_defaults(func=_cmd_off)

    p = sub.add_parser("fwd-vs-kappa",
                       help="max relative forward error vs condition number")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--kappa", type=_float_list, default=None)
    p.add_argument("--mode", type=_int_list, default=[1, 2, 3, 4, 5])
    p.add_argument("--variant", type=_str_list, default=list(VARIANTS))
    p.add_argument("--precond", choices=PRECOND_METHODS, default="hhqr")
    p.add_argument("--merge-baseline", default=None,
                   help="CSV of externally computed records to append")
    _add_common(p)
    p.set_defaults(func=_cmd_fwd_vs_kappa)

    p = sub.add_parser("fwd-vs-n",
                       help="max relative forward error vs matrix size")
    p.add_argument("--n", type=_int_list, default=None)
    p.add_argument("--kappa", type=float, default=1e10)
    p.add_argument("--mode", type=_int_list, default=[1, 2, 3, 4, 5])
    p.add_argument("--variant", type=_str_list, default=list(VARIANTS))
    p.add_argument("--precond", choices=PRECOND_METHODS, default="hhqr")
    _add_common(p)
    p.set_defaults(func=_cmd_fwd_vs_n)

    p = sub.add_parser("cond-reduction",
                       help="scaled condition numbers before/after "
                            "preconditioning")
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--kappa", type=_float_list, default=None)
    p.add_argument("--mode", type=_int_list, default=[1, 2, 3, 4, 5])
    p.add_argument("--precond", choices=PRECOND_METHODS, default="hhqr")
    p.add_argument("--specials", type=_str_list, default=None,
                   help=f"named matrices: {','.join(experiments.SPECIAL_BUILDERS)}")
    p.add_argument("--matrix-file", action="append", default=None,
                   help="text-format matrix file (repeatable; optional rows)")
    _add_common(p)
    p.set_defaults(func=_cmd_cond_reduction)

    p = sub.add_parser("solve", help="solve one matrix from a text file")
    p.add_argument("matrix_file")
    p.add_argument("--variant", choices=VARIANTS, default="mp3")
    p.add_argument("--precond", choices=PRECOND_METHODS, default="hhqr")
    p.add_argument("--out", default=None, help="write eigenvalues here")
    p.add_argument("--vectors-out", default=None,
                   help="write the eigenvector matrix here")
    p.set_defaults(func=_cmd_solve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "merge_baseline", None):
        # fwd-vs-kappa merging: run the grid, then append the baseline rows
        tasks = experiments.fwd_vs_kappa(
            args.n,
            args.kappa if args.kappa is not None else (
                FULL_KAPPAS if args.full else DESK_KAPPAS
            ),
            args.mode, args.variant, args.seed,
            precond_method=args.precond, timing=args.timing,
        )
        records = experiments.run_tasks(tasks, workers=args.workers)
        records = experiments.merge_baseline(records, args.merge_baseline)
        experiments.write_records(records, args.out, args.float_format)
        if not args.no_plot:
            from . import plots

            plots.render_fwd_figure(args.out, _figure_path(args.out),
                                    "kappa_target")
        return 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
