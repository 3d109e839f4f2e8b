"""Josephy-Newton and Josephy-Halley outer iterations.

Newton:  0 in f(x_k) + f'(x_k)(x_{k+1} - x_k) + F(x_{k+1})

Halley:  0 in f(x_k) + f'(x_k)(u_{k+1} - x_k) + F(u_{k+1})
         0 in f(x_k) + (f'(x_k) + f''(x_k)(u_{k+1} - x_k)/2)(x_{k+1} - x_k) + F(x_{k+1})
"""
from __future__ import annotations

import csv
import enum
import io
import json
import time
from dataclasses import dataclass, field

from .errors import DimensionMismatch, NoSolution, ZeroDerivative
from .numerics import PrecisionContext, Vector, euclidean_norm, format_scalar, sub
from .problems import ProblemInstance, SmoothMap, residual_distance
from .subproblem import halley_operator, newton_operator, solve_inclusion


class Method(str, enum.Enum):
    NEWTON = "newton"
    HALLEY = "halley"


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    SUBPROBLEM_FAILURE = "subproblem_failure"


class StopMeasure(str, enum.Enum):
    # sum of squared coordinate distances; matches the reference iteration counts
    SUMSQ = "sumsq"
    # the Euclidean residual itself
    NORM = "norm"


DEFAULT_TOL = "1e-300"
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True)
class SolveConfig:
    method: Method = Method.HALLEY
    tol: str = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    digits: int = 400
    stop_measure: StopMeasure = StopMeasure.SUMSQ

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "stop_measure", StopMeasure(self.stop_measure))
        object.__setattr__(self, "tol", str(self.tol))
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.context().scalar(self.tol) > 0:
            raise ValueError("tol must be positive")

    def context(self) -> PrecisionContext:
        return PrecisionContext(self.digits)

    def is_converged(self, residual, ctx: PrecisionContext) -> bool:
        if ctx.mp.isinf(residual):
            return False
        tol = ctx.scalar(self.tol)
        if self.stop_measure is StopMeasure.SUMSQ:
            return residual * residual <= tol
        return residual <= tol


@dataclass
class IterateRecord:
    k: int
    x: Vector
    residual: object
    u: Vector | None = None
    step_norm: object = None
    subproblem_solves: int = 0


@dataclass
class IterationTrace:
    problem: str
    config: SolveConfig
    records: list[IterateRecord] = field(default_factory=list)
    status: Status = Status.MAX_ITER
    total_subproblem_solves: int = 0
    wall_time: float = 0.0
    message: str = ""

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    @property
    def final(self) -> IterateRecord:
        return self.records[-1]

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def run(P: ProblemInstance, x0, cfg: SolveConfig | None = None) -> IterationTrace:
    """Iterate from ``x0`` until the residual test passes or ``max_iter``."""
    cfg = cfg or SolveConfig(digits=P.ctx.digits)
    ctx = P.ctx
    x = tuple(ctx.scalar(v) for v in x0)
    if len(x) != P.dim:
        raise DimensionMismatch(f"x0 has dim {len(x)}, problem {P.name} has dim {P.dim}")

    start = time.perf_counter()
    trace = IterationTrace(P.name, cfg)
    res = residual_distance(P, x)
    trace.records.append(IterateRecord(0, x, res))
    k = 0
    while not cfg.is_converged(res, ctx):
        if k >= cfg.max_iter:
            trace.status = Status.MAX_ITER
            break
        solves = 0
        u = None
        try:
            newton = solve_inclusion(newton_operator(P, x), ctx)
            solves += 1
            if cfg.method is Method.NEWTON:
                x_next = newton.x
            else:
                u = newton.x
                x_next = solve_inclusion(halley_operator(P, x, u), ctx).x
                solves += 1
        except NoSolution as exc:
            trace.total_subproblem_solves += solves
            trace.status = Status.SUBPROBLEM_FAILURE
            trace.message = f"iteration {k + 1}: {exc}"
            break
        k += 1
        step = euclidean_norm(sub(x_next, x), ctx)
        x = x_next
        res = residual_distance(P, x)
        trace.records.append(IterateRecord(k, x, res, u, step, solves))
        trace.total_subproblem_solves += solves
    else:
        trace.status = Status.CONVERGED
    trace.wall_time = time.perf_counter() - start
    return trace


def classical_halley_step(f: SmoothMap, x_k, ctx: PrecisionContext):
    """One scalar Halley step, returning the Newton predictor and the corrector.

    >>> ctx = PrecisionContext(30)
    >>> sq = SmoothMap(1, 1, lambda x: (x[0]**2 - 1,), lambda x: ((2*x[0],),),
    ...                lambda x, h: ((2*h[0],),))
    >>> u, x = classical_halley_step(sq, ctx.scalar(2), ctx)
    >>> float(u), round(float(x), 10)
    (1.25, 1.0769230769)
    """
    if f.dim_in != 1 or f.dim_out != 1:
        raise DimensionMismatch("classical_halley_step works on scalar maps only")
    x = (x_k,)
    fx = f.eval(x)[0]
    d1 = f.jacobian(x)[0][0]
    if d1 == 0:
        raise ZeroDerivative("f'(x_k) = 0")
    u = x_k - fx / d1
    # same operation order as halley_operator so results agree bit for bit
    denom = d1 + f.second_directional(x, (u - x_k,))[0][0] / 2
    if denom == 0:
        raise ZeroDerivative("Halley denominator vanished")
    return u, x_k - fx / denom


# -- serialization -----------------------------------------------------------

def _s(x, ctx):
    return None if x is None else format_scalar(x, ctx)


def trace_to_dict(trace: IterationTrace, ctx: PrecisionContext) -> dict:
    cfg = trace.config
    return {
        "problem": trace.problem,
        "config": {
            "method": cfg.method.value,
            "tol": cfg.tol,
            "max_iter": cfg.max_iter,
            "digits": cfg.digits,
            "stop_measure": cfg.stop_measure.value,
        },
        "status": trace.status.value,
        "iterations": trace.iterations,
        "total_subproblem_solves": trace.total_subproblem_solves,
        "wall_time": round(trace.wall_time, 6),
        "message": trace.message,
        "records": [
            {
                "k": r.k,
                "x": [_s(v, ctx) for v in r.x],
                "u": None if r.u is None else [_s(v, ctx) for v in r.u],
                "residual": _s(r.residual, ctx),
                "step_norm": _s(r.step_norm, ctx),
                "subproblem_solves": r.subproblem_solves,
            }
            for r in trace.records
        ],
    }


def trace_to_json(trace: IterationTrace, ctx: PrecisionContext) -> str:
    return json.dumps(trace_to_dict(trace, ctx), indent=2) + "\n"


def trace_from_dict(d: dict) -> IterationTrace:
    cfg = SolveConfig(**d["config"])
    ctx = cfg.context()

    def vec(v):
        return None if v is None else tuple(ctx.scalar(s) for s in v)

    def sc(s):
        return None if s is None else ctx.scalar(s)

    records = [
        IterateRecord(r["k"], vec(r["x"]), sc(r["residual"]), vec(r["u"]), sc(r["step_norm"]),
                      r["subproblem_solves"])
        for r in d["records"]
    ]
    return IterationTrace(d["problem"], cfg, records, Status(d["status"]),
                          d["total_subproblem_solves"], d["wall_time"], d.get("message", ""))


def trace_to_csv(trace: IterationTrace, ctx: PrecisionContext) -> str:
    n = len(trace.records[0].x)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", *(f"x{i + 1}" for i in range(n)), *(f"u{i + 1}" for i in range(n)),
                "residual", "step_norm"])
    for r in trace.records:
        u = r.u if r.u is not None else (None,) * n
        w.writerow([r.k, *(_s(v, ctx) for v in r.x), *(_s(v, ctx) or "" for v in u),
                    _s(r.residual, ctx), _s(r.step_norm, ctx) or ""])
    return buf.getvalue()
