"""Exact solver for the partially linearized inclusions

    0 in c + B (x - base) + F(x)

by enumerating branch patterns of the piecewise set-valued part.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

from .errors import DimensionMismatch, NoSolution, SingularMatrix
from .numerics import (
    Matrix,
    PrecisionContext,
    Vector,
    euclidean_norm,
    matadd,
    matvec,
    solve_linear,
    sub,
)
from .problems import BranchKind, ProblemInstance, SetValuedMap, coordinate_distance


class State(enum.IntEnum):
    # ordering is the tie-break order
    NEG = 0
    ZERO = 1
    POS = 2
    FREE = 3


LEGAL_STATES = {
    BranchKind.ZERO_MAP: (State.FREE,),
    BranchKind.F1: (State.ZERO, State.POS),
    BranchKind.F2: (State.NEG, State.ZERO, State.POS),
}

# value of g_i = (c + B(x - base))_i forced by an equality branch
_TARGET = {State.FREE: 0, State.POS: 0, State.NEG: 1}


@dataclass(frozen=True)
class SubproblemSpec:
    c: Vector
    B: Matrix
    base: Vector
    F: SetValuedMap

    def __post_init__(self):
        n = len(self.c)
        if len(self.B) != n or any(len(row) != n for row in self.B):
            raise DimensionMismatch(f"B must be {n}x{n}")
        if len(self.base) != n or self.F.dim != n:
            raise DimensionMismatch("c, base and F must share a dimension")


@dataclass(frozen=True)
class SubproblemSolution:
    x: Vector
    pattern: tuple[State, ...]
    verified_residual: object


def patterns(F: SetValuedMap):
    """All legal branch patterns in lexicographic order."""
    return itertools.product(*(LEGAL_STATES[k] for k in F.coords))


def linearized_residual(spec: SubproblemSpec, x: Vector, ctx: PrecisionContext):
    """``dist(0, c + B(x - base) + F(x))``; infinite if some F_i(x_i) is empty."""
    g = _affine(spec, x)
    d = [coordinate_distance(k, xi, gi) for k, xi, gi in zip(spec.F.coords, x, g)]
    if any(ctx.mp.isinf(di) for di in d):
        return ctx.inf
    return euclidean_norm(d, ctx)


def _affine(spec, x):
    step = sub(x, spec.base)
    Bs = matvec(spec.B, step)
    return tuple(ci + bi for ci, bi in zip(spec.c, Bs))


def _target(state, kind):
    if state is State.POS and kind is BranchKind.F2:
        return -1
    return _TARGET[state]


def _solve_pattern(spec: SubproblemSpec, pattern, ctx: PrecisionContext):
    """Candidate x for one pattern, or None if singular or infeasible."""
    mp = ctx.mp
    n = len(spec.c)
    kinds = spec.F.coords
    free = [i for i in range(n) if pattern[i] is not State.ZERO]
    fixed = [i for i in range(n) if pattern[i] is State.ZERO]

    # unknowns are the steps d_j = x_j - base_j; ZERO coordinates have d_j = -base_j
    step = [None] * n
    for j in fixed:
        step[j] = -spec.base[j]
    if free:
        A = tuple(tuple(spec.B[i][j] for j in free) for i in free)
        rhs = []
        for i in free:
            r = _target(pattern[i], kinds[i]) - spec.c[i]
            for j in fixed:
                r += spec.B[i][j] * spec.base[j]
            rhs.append(r)
        try:
            d = solve_linear(A, tuple(rhs), ctx)
        except SingularMatrix:
            return None
        for j, dj in zip(free, d):
            step[j] = dj

    x = tuple(mp.zero if pattern[i] is State.ZERO else spec.base[i] + step[i] for i in range(n))
    g = tuple(ci + bi for ci, bi in zip(spec.c, matvec(spec.B, tuple(step))))

    eq_tol = ctx.eps(50) * (1 + euclidean_norm(spec.c, ctx))
    for i in range(n):
        s, k, gi, xi = pattern[i], kinds[i], g[i], x[i]
        if s is State.POS and not xi > 0:
            return None
        if s is State.NEG and not xi < 0:
            return None
        if s is State.ZERO:
            if k is BranchKind.F1 and not gi <= 0:
                return None
            if k is BranchKind.F2 and not abs(gi) <= 1:
                return None
        elif abs(gi - _target(s, k)) > eq_tol:
            return None
    return x


def solve_inclusion(spec: SubproblemSpec, ctx: PrecisionContext) -> SubproblemSolution:
    """Solve the linearized inclusion exactly.

    Every legal branch pattern is tried; the feasible solution closest to
    ``spec.base`` wins, ties going to the lexicographically first pattern.
    """
    best = None
    best_dist = None
    for pattern in patterns(spec.F):
        x = _solve_pattern(spec, pattern, ctx)
        if x is None:
            continue
        dist = sum((a - b) ** 2 for a, b in zip(x, spec.base))
        if best is None or dist < best_dist:
            best, best_dist = (x, pattern), dist
    if best is None:
        raise NoSolution("no branch pattern admits a feasible solution")
    x, pattern = best
    return SubproblemSolution(x, tuple(pattern), linearized_residual(spec, x, ctx))


def newton_operator(P: ProblemInstance, x_k: Vector) -> SubproblemSpec:
    """Linearization ``f(x_k) + f'(x_k)(x - x_k) + F(x)``."""
    return SubproblemSpec(P.f.eval(x_k), P.f.jacobian(x_k), tuple(x_k), P.F)


def halley_operator(P: ProblemInstance, x_k: Vector, u_next: Vector) -> SubproblemSpec:
    """Corrector ``f(x_k) + (f'(x_k) + f''(x_k)(u_next - x_k)/2)(x - x_k) + F(x)``."""
    J = P.f.jacobian(x_k)
    S = P.f.second_directional(x_k, sub(u_next, x_k))
    B = matadd(J, tuple(tuple(s / 2 for s in row) for row in S))
    return SubproblemSpec(P.f.eval(x_k), B, tuple(x_k), P.F)


__all__ = [
    "State",
    "SubproblemSpec",
    "SubproblemSolution",
    "solve_inclusion",
    "newton_operator",
    "halley_operator",
    "linearized_residual",
    "patterns",
]
