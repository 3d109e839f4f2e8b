"""Reproduction harness: reference tables, Newton/Halley error series, and the
starting-point grid classification.

Grid cases (cost = subproblem solves; Newton 1 per iteration, Halley 2):

    0  both converge, Newton cost <= Halley cost
    1  both converge, Halley cost < Newton cost
    2  Halley converges, Newton hits the cap or fails
    3  Halley does not converge
"""
from __future__ import annotations

import csv
import io
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .numerics import PrecisionContext, Vector, format_scalar
from .problems import builtin
from .rates import error_sequence, rate_header, rate_rows, reference_solution, rows_to_csv
from .solver import Method, SolveConfig, StopMeasure, run

TABLES = {
    "table1": ("ex1i", ("6",)),
    "table2": ("ex1ii", ("-10",)),
    "table3": ("ex2i", ("1", "-1")),
}

FIGURES = {
    "fig1": ("ex2i", ("1", "-1")),
    "fig2": "ex2i",
    "fig3": "ex2ii",
}

DEFAULT_GRID_N = 41
DESK_PROFILE = {"digits": 120, "tol": "1e-100"}


def config_comments(cfg: SolveConfig) -> list[str]:
    return [f"digits={cfg.digits} tol={cfg.tol} max_iter={cfg.max_iter} stop_measure={cfg.stop_measure.value}"]


def reproduce_table(name: str, cfg: SolveConfig | None = None):
    """Run Halley from the tabulated start and return ``(header, rows)``."""
    cfg = cfg or SolveConfig()
    try:
        problem, x0 = TABLES[name]
    except KeyError:
        raise ValueError(f"unknown table {name!r}; choose from {sorted(TABLES)}") from None
    ctx = cfg.context()
    P = builtin(problem, ctx)
    halley_cfg = SolveConfig(Method.HALLEY, cfg.tol, cfg.max_iter, cfg.digits, cfg.stop_measure)
    trace = run(P, [ctx.scalar(v) for v in x0], halley_cfg)
    if not trace.converged:
        raise RuntimeError(f"{name}: solver ended with {trace.status.value} {trace.message}")
    xbar = reference_solution(P, cfg)
    return rate_header(P.dim), rate_rows(trace, xbar, ctx)


def table_csv(name: str, cfg: SolveConfig | None = None) -> str:
    cfg = cfg or SolveConfig()
    header, rows = reproduce_table(name, cfg)
    return rows_to_csv(header, rows, [f"{name} ({TABLES[name][0]}, x0={','.join(TABLES[name][1])})",
                                      *config_comments(cfg)])


def comparison_series(P, x0: Vector, cfg: SolveConfig | None = None, xbar: Vector | None = None):
    """Error series ``[(k, e_k), ...]`` of both methods from the same start."""
    cfg = cfg or SolveConfig(digits=P.ctx.digits)
    xbar = xbar if xbar is not None else reference_solution(P, cfg)
    out = {}
    for method in (Method.NEWTON, Method.HALLEY):
        mcfg = SolveConfig(method, cfg.tol, cfg.max_iter, cfg.digits, cfg.stop_measure)
        trace = run(P, x0, mcfg)
        errs = error_sequence(trace, xbar, P.ctx)
        out[method.value] = list(enumerate(errs))
    return out


def series_csv(series, ctx: PrecisionContext, cfg: SolveConfig) -> str:
    buf = io.StringIO()
    for c in config_comments(cfg):
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "k", "e_k"])
    for method in ("newton", "halley"):
        for k, e in series[method]:
            w.writerow([method, k, format_scalar(e, ctx, 20)])
    return buf.getvalue()


# -- grid ----------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    problem: str
    x_range: tuple = ("-4", "4")
    y_range: tuple = ("-4", "4")
    n_per_axis: int = DEFAULT_GRID_N
    cfg: SolveConfig = field(default_factory=SolveConfig)
    params: tuple = ()

    def __post_init__(self):
        if self.n_per_axis < 2:
            raise ValueError("n_per_axis must be >= 2")
        ctx = PrecisionContext(16)
        for lo, hi in (self.x_range, self.y_range):
            if not ctx.scalar(str(lo)) < ctx.scalar(str(hi)):
                raise ValueError(f"degenerate interval [{lo}, {hi}]")


@dataclass(frozen=True)
class GridCellResult:
    x0: Vector
    case: int
    newton_iters: int
    halley_iters: int
    newton_cost: int
    halley_cost: int
    newton_time: float
    halley_time: float
    newton_status: str = ""
    halley_status: str = ""


def classify_cell(P, x0: Vector, cfg: SolveConfig) -> GridCellResult:
    common = dict(tol=cfg.tol, max_iter=cfg.max_iter, digits=cfg.digits, stop_measure=cfg.stop_measure)
    n = run(P, x0, SolveConfig(Method.NEWTON, **common))
    h = run(P, x0, SolveConfig(Method.HALLEY, **common))
    n_cost = n.iterations
    h_cost = 2 * h.iterations
    if not h.converged:
        case = 3
    elif not n.converged:
        case = 2
    elif n_cost <= h_cost:
        case = 0
    else:
        case = 1
    return GridCellResult(tuple(x0), case, n.iterations, h.iterations, n_cost, h_cost,
                          n.wall_time, h.wall_time, n.status.value, h.status.value)


def lattice(spec: GridSpec, ctx: PrecisionContext):
    """Row-major lattice points starting from the lower-left corner."""
    n = spec.n_per_axis

    def axis(lo, hi):
        lo, hi = ctx.scalar(str(lo)), ctx.scalar(str(hi))
        return [lo + (hi - lo) * i / (n - 1) for i in range(n)]

    xs, ys = axis(*spec.x_range), axis(*spec.y_range)
    return [(x, y) for y in ys for x in xs]


def _cell_worker(args):
    problem, params, digits, cfg, x0_strings = args
    ctx = PrecisionContext(digits)
    P = builtin(problem, ctx, **dict(params))
    # mpf values of a private context do not pickle; the parent re-attaches x0
    return replace(classify_cell(P, tuple(ctx.scalar(s) for s in x0_strings), cfg), x0=())


def run_grid(spec: GridSpec, workers: int = 1):
    """Classify every lattice start; returns ``(cells, summary)``.

    Cells come back in lattice order whatever the completion order.
    """
    cfg = spec.cfg
    ctx = cfg.context()
    points = lattice(spec, ctx)
    if workers > 1:
        jobs = [(spec.problem, spec.params, cfg.digits, cfg, tuple(format_scalar(v, ctx) for v in pt))
                for pt in points]
        with ProcessPoolExecutor(workers) as pool:
            done = pool.map(_cell_worker, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
            cells = [replace(c, x0=pt) for c, pt in zip(done, points)]
    else:
        P = builtin(spec.problem, ctx, **dict(spec.params))
        cells = [classify_cell(P, pt, cfg) for pt in points]
    counts = Counter(c.case for c in cells)
    summary = {
        "case_counts": {str(k): counts.get(k, 0) for k in range(4)},
        "grid_spec": {
            "problem": spec.problem,
            "x_range": [str(v) for v in spec.x_range],
            "y_range": [str(v) for v in spec.y_range],
            "n_per_axis": spec.n_per_axis,
            "params": dict(spec.params),
        },
        "config": {
            "digits": cfg.digits,
            "tol": cfg.tol,
            "max_iter": cfg.max_iter,
            "stop_measure": cfg.stop_measure.value,
        },
    }
    return cells, summary


GRID_COLUMNS = ["x0_1", "x0_2", "case", "newton_iters", "halley_iters", "newton_cost", "halley_cost",
                "newton_status", "halley_status"]
TIMING_COLUMNS = ["newton_time", "halley_time"]


def grid_csv(cells, cfg: SolveConfig, timing: bool = True) -> str:
    """Per-cell CSV; with ``timing=False`` the bytes are fully reproducible."""
    ctx = PrecisionContext(max(16, min(cfg.digits, 30)))
    buf = io.StringIO()
    for c in config_comments(cfg):
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GRID_COLUMNS + (TIMING_COLUMNS if timing else []))
    for cell in cells:
        row = [
            *(format_scalar(ctx.mp.mpf(v), ctx, 15) for v in cell.x0),
            cell.case, cell.newton_iters, cell.halley_iters, cell.newton_cost, cell.halley_cost,
            cell.newton_status, cell.halley_status,
        ]
        if timing:
            row += [f"{cell.newton_time:.6f}", f"{cell.halley_time:.6f}"]
        w.writerow(row)
    return buf.getvalue()


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def desk_config(max_iter: int = 200) -> SolveConfig:
    return SolveConfig(Method.HALLEY, DESK_PROFILE["tol"], max_iter, DESK_PROFILE["digits"], StopMeasure.SUMSQ)
