"""Error sequences and empirical convergence-order estimates.

With ``e_k = ||x_k - xbar||`` and ``e_{k+1} ~ L e_k^r``, three consecutive
errors give

    r_{k+2} = (log e_{k+2} - log e_{k+1}) / (log e_{k+1} - log e_k)
    L_{k+2} = e_{k+2} / e_{k+1}^{r_{k+2}}
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import DimensionMismatch
from .numerics import PrecisionContext, Vector, euclidean_norm, format_fixed, format_sci, sub
from .problems import ProblemInstance
from .solver import IterationTrace, Method, SolveConfig, StopMeasure, run

# errors below 10**(ZERO_OFFSET - digits) are arithmetic noise
ZERO_OFFSET = 20


@dataclass(frozen=True)
class RateEstimate:
    k: int
    e_norm: object
    r: object = None
    L: object = None


def error_sequence(trace: IterationTrace, xbar: Vector, ctx: PrecisionContext) -> list:
    out = []
    for rec in trace.records:
        if len(rec.x) != len(xbar):
            raise DimensionMismatch(f"iterate dim {len(rec.x)} vs reference dim {len(xbar)}")
        out.append(euclidean_norm(sub(rec.x, xbar), ctx))
    return out


def estimate_rates(errors, ctx: PrecisionContext) -> list[RateEstimate]:
    mp = ctx.mp
    floor = ctx.eps(ZERO_OFFSET)
    est = []
    for k, e in enumerate(errors):
        r = L = None
        if k >= 2:
            e0, e1, e2 = errors[k - 2], errors[k - 1], e
            if min(e0, e1, e2) > floor:
                l0, l1, l2 = mp.log(e0), mp.log(e1), mp.log(e2)
                if l1 != l0:
                    r = (l2 - l1) / (l1 - l0)
                    L = mp.exp(l2 - r * l1)
        est.append(RateEstimate(k, e, r, L))
    return est


def reference_solution(P: ProblemInstance, cfg: SolveConfig | None = None,
                       start: Vector | None = None) -> Vector:
    """Exact solution if known, otherwise a Halley solve at doubled precision.

    The high-precision run stops on the plain residual at ``10**(-1.5 digits)``
    and the result is returned at the problem's own precision.
    """
    if P.exact_solution is not None:
        return P.exact_solution
    from .problems import builtin

    cfg = cfg or SolveConfig(digits=P.ctx.digits)
    digits = 2 * max(cfg.digits, P.ctx.digits)
    tol_exp = -(3 * max(cfg.digits, P.ctx.digits)) // 2
    hi_cfg = SolveConfig(Method.HALLEY, f"1e{tol_exp}", max(cfg.max_iter, 200), digits, StopMeasure.NORM)
    hi = builtin(P.name, hi_cfg.context(), **{k: str(v) for k, v in P.params.items()})
    x0 = start if start is not None else P.default_start
    if x0 is None:
        raise ValueError(f"{P.name} has no registered start point")
    trace = run(hi, [hi.ctx.scalar(str(v)) for v in x0], hi_cfg)
    if not trace.converged:
        raise RuntimeError(f"reference solve for {P.name} ended with {trace.status.value}: {trace.message}")
    return tuple(P.ctx.scalar(v) for v in trace.final.x)


def rate_rows(trace: IterationTrace, xbar: Vector, ctx: PrecisionContext):
    """Rows ``k, x_k..., e_k, r_k, L_k`` formatted like the reference tables."""
    est = estimate_rates(error_sequence(trace, xbar, ctx), ctx)
    rows = []
    for rec, re in zip(trace.records, est):
        rows.append([
            str(rec.k),
            *(format_fixed(v, 6, ctx) for v in rec.x),
            format_sci(re.e_norm, 2, ctx),
            "-" if re.r is None else format_fixed(re.r, 6, ctx),
            "-" if re.L is None else format_fixed(re.L, 6, ctx),
        ])
    return rows


def rate_header(dim: int) -> list[str]:
    xs = ["x_k"] if dim == 1 else [f"x_k^{i + 1}" for i in range(dim)]
    return ["k", *xs, "e_k", "r_k", "L_k"]


def rows_to_csv(header, rows, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
