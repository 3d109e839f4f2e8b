"""Generalized equations ``0 in f(x) + F(x)`` and the built-in test problems.

The set-valued part is a coordinate-wise product of three one-dimensional
maps:

* ``ZERO_MAP``: ``F(x) = {0}``
* ``F1``: ``[0, inf)`` at 0, ``{0}`` for x > 0, empty for x < 0
* ``F2``: ``{-1}`` for x < 0, ``[-1, 1]`` at 0, ``{1}`` for x > 0

``F1`` is taken literally as written above, which is the negative of the
usual normal cone of ``[0, inf)`` at the origin.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import DimensionMismatch, UnknownProblem
from .numerics import Matrix, PrecisionContext, Vector, euclidean_norm


class BranchKind(enum.Enum):
    ZERO_MAP = "zero"
    F1 = "F1"
    F2 = "F2"


@dataclass(frozen=True)
class SetValuedMap:
    """Cartesian product of one-dimensional branch kinds."""

    coords: tuple[BranchKind, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(BranchKind(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def zero(cls, n: int) -> "SetValuedMap":
        return cls((BranchKind.ZERO_MAP,) * n)

    def contains(self, x: Vector, y: Vector) -> bool:
        """Whether ``y`` lies in ``F(x)``."""
        _check_dim(self.dim, x)
        _check_dim(self.dim, y)
        return all(coordinate_distance(k, xi, -yi) == 0 for k, xi, yi in zip(self.coords, x, y))


def coordinate_distance(kind: BranchKind, xi, gi):
    """``dist(-g_i, F_i(x_i))`` for one coordinate.

    Returns an mpf ``inf`` when ``F_i(x_i)`` is empty.
    """
    if kind is BranchKind.ZERO_MAP:
        return abs(gi)
    if kind is BranchKind.F1:
        if xi > 0:
            return abs(gi)
        if xi == 0:
            return gi if gi > 0 else gi * 0
        return _inf_like(gi)
    if kind is BranchKind.F2:
        if xi < 0:
            return abs(gi - 1)
        if xi > 0:
            return abs(gi + 1)
        d = abs(gi) - 1
        return d if d > 0 else d * 0
    raise ValueError(f"unknown branch kind {kind!r}")


def _inf_like(a):
    return type(a).context.inf


@dataclass(frozen=True)
class SmoothMap:
    """A twice differentiable map with analytic derivatives.

    ``second_directional(x, h)`` is the matrix ``f''(x)(h)``, i.e. the
    operator ``v -> f''(x)(h, v)``.
    """

    dim_in: int
    dim_out: int
    eval: Callable[[Vector], Vector]
    jacobian: Callable[[Vector], Matrix]
    second_directional: Callable[[Vector, Vector], Matrix]


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    f: SmoothMap
    F: SetValuedMap
    ctx: PrecisionContext
    exact_solution: Vector | None = None
    params: Mapping[str, object] = field(default_factory=dict)
    default_start: Vector | None = None

    def __post_init__(self):
        if self.f.dim_in != self.f.dim_out or self.f.dim_in != self.F.dim:
            raise DimensionMismatch(
                f"f maps R^{self.f.dim_in} -> R^{self.f.dim_out} but F has {self.F.dim} coordinates"
            )

    @property
    def dim(self) -> int:
        return self.F.dim


def residual_distance(P: ProblemInstance, x: Vector):
    """``dist(0, f(x) + F(x))`` in the Euclidean norm.

    Infinite when some ``F_i(x_i)`` is empty.
    """
    _check_dim(P.dim, x)
    fx = P.f.eval(x)
    d = [coordinate_distance(k, xi, fi) for k, xi, fi in zip(P.F.coords, x, fx)]
    if any(P.ctx.mp.isinf(di) for di in d):
        return P.ctx.inf
    return euclidean_norm(d, P.ctx)


def _check_dim(n: int, x):
    if len(x) != n:
        raise DimensionMismatch(f"expected dimension {n}, got {len(x)}")


# -- built-in instances -------------------------------------------------------

def _sinh_shift(ctx: PrecisionContext, shift) -> SmoothMap:
    mp = ctx.mp
    return SmoothMap(
        1,
        1,
        eval=lambda x: (mp.sinh(x[0]) + shift,),
        jacobian=lambda x: ((mp.cosh(x[0]),),),
        second_directional=lambda x, h: ((mp.sinh(x[0]) * h[0],),),
    )


def exp_pair(ctx: PrecisionContext, p, q1, q2) -> SmoothMap:
    """``f(x1, x2) = (exp(x1 - x2 - p) - q1, exp(x1 + x2 - p) - q2)``."""
    mp = ctx.mp

    def eval_(x):
        return (mp.exp(x[0] - x[1] - p) - q1, mp.exp(x[0] + x[1] - p) - q2)

    def jac(x):
        a = mp.exp(x[0] - x[1] - p)
        b = mp.exp(x[0] + x[1] - p)
        return ((a, -a), (b, b))

    def second(x, h):
        a = mp.exp(x[0] - x[1] - p) * (h[0] - h[1])
        b = mp.exp(x[0] + x[1] - p) * (h[0] + h[1])
        return ((a, -a), (b, b))

    return SmoothMap(2, 2, eval_, jac, second)


def _ex1i(ctx, **params):
    _no_params("ex1i", params)
    mp = ctx.mp
    three_eighths = mp.mpf(3) / 8
    return ProblemInstance(
        "ex1i",
        _sinh_shift(ctx, -three_eighths),
        SetValuedMap((BranchKind.F1,)),
        ctx,
        exact_solution=(mp.asinh(three_eighths),),
        default_start=(mp.mpf(6),),
    )


def _ex1ii(ctx, **params):
    _no_params("ex1ii", params)
    mp = ctx.mp
    return ProblemInstance(
        "ex1ii",
        _sinh_shift(ctx, mp.mpf(10)),
        SetValuedMap((BranchKind.F2,)),
        ctx,
        exact_solution=(-mp.asinh(9),),
        default_start=(mp.mpf(-10),),
    )


def _ex2(name, kinds, defaults, has_exact):
    def build(ctx, **params):
        unknown = set(params) - set(defaults)
        if unknown:
            raise ValueError(f"{name} has no parameter(s) {sorted(unknown)}")
        vals = {k: ctx.scalar(params.get(k, v)) for k, v in defaults.items()}
        p, q1, q2 = vals["p"], vals["q1"], vals["q2"]
        if q1 <= 0 or q2 <= 0:
            raise ValueError("q1 and q2 must be positive")
        mp = ctx.mp
        exact = None
        if has_exact:
            exact = (mp.log(q1 * q2) / 2 + p, mp.log(q2 / q1) / 2)
        return ProblemInstance(
            name,
            exp_pair(ctx, p, q1, q2),
            SetValuedMap(kinds),
            ctx,
            exact_solution=exact,
            params=vals,
            default_start=(mp.mpf(1), mp.mpf(-1)),
        )

    return build


def _no_params(name, params):
    if params:
        raise ValueError(f"{name} has no parameters (got {sorted(params)})")


_Z, _F2 = BranchKind.ZERO_MAP, BranchKind.F2

BUILTINS = {
    "ex1i": _ex1i,
    "ex1ii": _ex1ii,
    "ex2i": _ex2("ex2i", (_Z, _Z), {"p": "3", "q1": "0.1", "q2": "0.2"}, True),
    "ex2ii": _ex2("ex2ii", (_F2, _F2), {"p": "0", "q1": "2.3", "q2": "1"}, False),
}


def builtin(name: str, ctx: PrecisionContext | None = None, **params) -> ProblemInstance:
    """Build a registered problem at the given precision.

    ``p``, ``q1`` and ``q2`` may be overridden for the two-variable problems;
    the closed-form solution of ex2i follows the overrides.
    """
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise UnknownProblem(f"unknown problem {name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(ctx or PrecisionContext(), **params)
