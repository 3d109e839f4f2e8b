"""Command-line interface.

Exit codes: 0 success (including a FAIL certificate), 2 usage error,
3 solver failure.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from . import bench
from .kantorovich import CONDITION_LABELS, CertificateInput, MajorantParams, certify, report_to_json
from .numerics import DEFAULT_DIGITS, MIN_DIGITS, PrecisionContext
from .problems import BUILTINS, builtin
from .rates import rate_header, rate_rows, reference_solution, rows_to_csv
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, Method, SolveConfig, StopMeasure, run, trace_to_csv, trace_to_json

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 2, 3


class UsageError(Exception):
    pass


def default_digits() -> int:
    env = os.environ.get("GE_DIGITS")
    if env is None:
        return DEFAULT_DIGITS
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"GE_DIGITS must be an integer, got {env!r}") from None


def write_atomic(path: str | Path, text: str):
    """Write via a temporary file so a failure never leaves a partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, out: str | None):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


# -- argument helpers -------------------------------------------------------------

def _add_solve_options(p: argparse.ArgumentParser, method_default="halley"):
    p.add_argument("--problem", required=True, choices=sorted(BUILTINS))
    p.add_argument("--method", choices=[m.value for m in Method], default=method_default)
    p.add_argument("--x0", help="comma-separated start point (default: the problem's registered start)")
    p.add_argument("--digits", type=int, default=None)
    p.add_argument("--tol", default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--stop-measure", choices=[s.value for s in StopMeasure], default=StopMeasure.SUMSQ.value)
    for name in ("p", "q1", "q2"):
        p.add_argument(f"--{name}", default=None, help=f"override parameter {name} (two-variable problems)")
    p.add_argument("--out", default=None)


def _config(args, method=None) -> SolveConfig:
    digits = args.digits if args.digits is not None else default_digits()
    if digits < MIN_DIGITS:
        raise UsageError(f"--digits must be >= {MIN_DIGITS}")
    if args.max_iter < 1:
        raise UsageError("--max-iter must be >= 1")
    try:
        return SolveConfig(method or args.method, args.tol, args.max_iter, digits, args.stop_measure)
    except ValueError as exc:
        raise UsageError(f"invalid --tol {args.tol!r}: {exc}") from None


def _params(args) -> dict:
    return {k: getattr(args, k) for k in ("p", "q1", "q2") if getattr(args, k, None) is not None}


def _problem(args, ctx):
    try:
        return builtin(args.problem, ctx, **_params(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _x0(args, P, ctx):
    if args.x0 is None:
        return P.default_start
    try:
        x0 = tuple(ctx.scalar(s) for s in args.x0.split(","))
    except (ValueError, TypeError):
        raise UsageError(f"cannot parse --x0 {args.x0!r}") from None
    if len(x0) != P.dim:
        raise UsageError(f"--x0 has {len(x0)} components, {args.problem} needs {P.dim}")
    return x0


def _scalar_arg(ctx, name, text):
    try:
        return ctx.scalar(text)
    except (ValueError, TypeError):
        raise UsageError(f"cannot parse --{name} {text!r}") from None


def _range(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--range expects 'a,b', got {text!r}")
    return tuple(s.strip() for s in parts)


# -- subcommands -----------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = _config(args)
    ctx = cfg.context()
    P = _problem(args, ctx)
    x0 = _x0(args, P, ctx)
    trace = run(P, x0, cfg)
    text = trace_to_json(trace, ctx) if args.format == "json" else trace_to_csv(trace, ctx)
    emit(text, args.out)
    if not trace.converged:
        print(f"solver stopped: {trace.status.value} {trace.message}".rstrip(), file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_rate(args) -> int:
    cfg = _config(args)
    ctx = cfg.context()
    P = _problem(args, ctx)
    x0 = _x0(args, P, ctx)
    trace = run(P, x0, cfg)
    if not trace.converged:
        print(f"solver stopped: {trace.status.value} {trace.message}".rstrip(), file=sys.stderr)
        return EXIT_FAILURE
    xbar = reference_solution(P, cfg)
    emit(rows_to_csv(rate_header(P.dim), rate_rows(trace, xbar, ctx), bench.config_comments(cfg)), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    digits = args.digits if args.digits is not None else default_digits()
    if digits < MIN_DIGITS:
        raise UsageError(f"--digits must be >= {MIN_DIGITS}")
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    ctx = PrecisionContext(digits)
    vals = {k: _scalar_arg(ctx, k, getattr(args, k)) for k in ("kappa", "l1", "l2", "eta", "a", "b", "y0norm")}
    try:
        params = MajorantParams(vals["kappa"], vals["l1"], vals["l2"], vals["eta"])
        inp = CertificateInput(params, vals["a"], vals["b"], vals["y0norm"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = certify(inp, ctx, steps=args.steps)

    mp = ctx.mp
    lines = [f"eta_max = {mp.nstr(report.eta_max, 12)}"]
    if report.t_bar is not None:
        lines.append(f"t_bar = {mp.nstr(report.t_bar, 12)}  t_hat = {mp.nstr(report.t_hat, 12)}")
    width = max(len(v) for v in CONDITION_LABELS.values())
    for key, ok in report.conditions.items():
        lines.append(f"{CONDITION_LABELS[key]:<{width}}  {'PASS' if ok else 'FAIL'}")
    lines.append(f"certificate: {report.verdict}")
    if report.alpha_fit is not None:
        lines.append(f"R-cubic envelope fit (empirical): alpha = {mp.nstr(report.alpha_fit, 8)}, "
                     f"M = {mp.nstr(report.M_fit, 8)}")
    text = "\n".join(lines) + "\n"
    js = report_to_json(report, inp, ctx)
    if args.out:
        write_atomic(args.out, js)
        sys.stdout.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.write(js)
    return EXIT_OK


def _grid_outputs(cells, summary, cfg, out, timing):
    out = Path(out)
    summary_path = out.with_suffix(".json") if out.suffix != ".json" else out.with_name(out.stem + "_summary.json")
    csv_text = bench.grid_csv(cells, cfg, timing=timing)
    write_atomic(out, csv_text)
    write_atomic(summary_path, bench.summary_json(summary))
    counts = summary["case_counts"]
    print(f"wrote {out} and {summary_path}; cases " + " ".join(f"{k}:{v}" for k, v in counts.items()))


def cmd_grid(args) -> int:
    cfg = _config(args, method=Method.HALLEY)
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    if args.problem not in ("ex2i", "ex2ii"):
        raise UsageError("grid runs need a two-variable problem (ex2i, ex2ii)")
    rng = _range(args.range)
    try:
        spec = bench.GridSpec(args.problem, rng, rng, args.n, cfg, tuple(sorted(_params(args).items())))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cells, summary = bench.run_grid(spec, workers=args.workers)
    _grid_outputs(cells, summary, cfg, args.out, timing=not args.no_timing)
    return EXIT_OK


def cmd_repro(args) -> int:
    target = args.target
    if args.max_iter < 1:
        raise UsageError("--max-iter must be >= 1")
    if args.profile == "desk":
        cfg = bench.desk_config(args.max_iter)
    else:
        digits = args.digits if args.digits is not None else default_digits()
        if digits < MIN_DIGITS:
            raise UsageError(f"--digits must be >= {MIN_DIGITS}")
        cfg = SolveConfig(Method.HALLEY, DEFAULT_TOL, args.max_iter, digits)
    if target in ("fig2", "fig3") and args.n < 2:
        raise UsageError("--n must be >= 2")

    if target in bench.TABLES:
        text = bench.table_csv(target, cfg)
        emit(text, args.out)
        return EXIT_OK
    if target == "fig1":
        problem, x0 = bench.FIGURES["fig1"]
        ctx = cfg.context()
        P = builtin(problem, ctx)
        series = bench.comparison_series(P, tuple(ctx.scalar(v) for v in x0), cfg)
        emit(bench.series_csv(series, ctx, cfg), args.out)
        return EXIT_OK
    if not args.out:
        raise UsageError(f"repro {target} needs --out")
    spec = bench.GridSpec(bench.FIGURES[target], ("-4", "4"), ("-4", "4"), args.n, cfg)
    cells, summary = bench.run_grid(spec, workers=args.workers)
    _grid_outputs(cells, summary, cfg, args.out, timing=not args.no_timing)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="josephy", description="Josephy-Newton / Josephy-Halley toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one method and print the iteration trace")
    _add_solve_options(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("rate", help="trace joined with e_k, r_k, L_k")
    _add_solve_options(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("certify", help="semilocal majorant certificate")
    for name in ("kappa", "l1", "l2", "eta", "a", "b", "y0norm"):
        p.add_argument(f"--{name}", required=True)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--digits", type=int, default=None)
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("grid", help="classify a lattice of start points")
    p.add_argument("--problem", required=True, choices=sorted(BUILTINS))
    p.add_argument("--range", default="-4,4")
    p.add_argument("--n", type=int, default=bench.DEFAULT_GRID_N)
    p.add_argument("--digits", type=int, default=None)
    p.add_argument("--tol", default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--stop-measure", choices=[s.value for s in StopMeasure], default=StopMeasure.SUMSQ.value)
    for name in ("p", "q1", "q2"):
        p.add_argument(f"--{name}", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="omit wall-time columns (byte-reproducible CSV)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("repro", help="regenerate a reference table or figure data set")
    p.add_argument("target", choices=[*bench.TABLES, *bench.FIGURES])
    p.add_argument("--out", default=None)
    p.add_argument("--profile", choices=["full", "desk"], default="full",
                   help="desk: 120 digits, tol 1e-100")
    p.add_argument("--digits", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--n", type=int, default=bench.DEFAULT_GRID_N)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
