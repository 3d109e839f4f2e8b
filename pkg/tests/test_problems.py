import random
import zlib

import pytest

from josephy.errors import DimensionMismatch, UnknownProblem
from josephy.numerics import PrecisionContext, matvec
from josephy.problems import (
    BUILTINS,
    BranchKind,
    ProblemInstance,
    SetValuedMap,
    SmoothMap,
    builtin,
    coordinate_distance,
    residual_distance,
)


def affine_1d(ctx, slope, shift, kind):
    f = SmoothMap(1, 1, lambda x: (slope * x[0] + shift,), lambda x: ((ctx.scalar(slope),),),
                  lambda x, h: ((ctx.mp.zero,),))
    return ProblemInstance("affine", f, SetValuedMap((kind,)), ctx)


def const_1d(ctx, value, kind):
    f = SmoothMap(1, 1, lambda x: (ctx.scalar(value),), lambda x: ((ctx.mp.zero,),),
                  lambda x, h: ((ctx.mp.zero,),))
    return ProblemInstance("const", f, SetValuedMap((kind,)), ctx)


def test_ex1_exact_solutions_have_zero_residual(ctx):
    mp = ctx.mp
    P = builtin("ex1i", ctx)
    assert residual_distance(P, (mp.asinh(mp.mpf(3) / 8),)) <= ctx.eps(12)
    Q = builtin("ex1ii", ctx)
    assert residual_distance(Q, (-mp.asinh(9),)) <= ctx.eps(12)


def test_reference_solution_values(ctx):
    mp = ctx.mp
    assert mp.nstr(builtin("ex1i", ctx).exact_solution[0], 16) == "0.3667246042301368"
    assert mp.nstr(builtin("ex1ii", ctx).exact_solution[0], 16) == "-2.893443985885871"
    x1, x2 = builtin("ex2i", ctx).exact_solution
    assert mp.nstr(x1, 16) == "1.043988497285927"
    assert mp.nstr(x2, 15) == "0.346573590279973"


@pytest.mark.parametrize("name", ["ex1i", "ex1ii", "ex2i"])
def test_builtin_exact_solution_residual(ctx, name):
    P = builtin(name, ctx)
    assert residual_distance(P, P.exact_solution) <= ctx.eps(12)


def test_ex2ii_has_no_closed_form(ctx):
    assert builtin("ex2ii", ctx).exact_solution is None


def test_f1_empty_for_negative_argument(ctx):
    P = affine_1d(ctx, 1, -1, BranchKind.F1)
    assert ctx.mp.isinf(residual_distance(P, (ctx.scalar("-0.5"),)))


def test_f2_interval_absorbs_residual(ctx):
    P = const_1d(ctx, "0.5", BranchKind.F2)
    assert residual_distance(P, (ctx.scalar(0),)) == 0


@pytest.mark.parametrize(
    "kind, x, g, expected",
    [
        (BranchKind.ZERO_MAP, "5", "-2", "2"),
        (BranchKind.F1, "1", "-2", "2"),
        (BranchKind.F1, "0", "-2", "0"),
        (BranchKind.F1, "0", "3", "3"),
        (BranchKind.F2, "-1", "3", "2"),
        (BranchKind.F2, "2", "3", "4"),
        (BranchKind.F2, "0", "0.3", "0"),
        (BranchKind.F2, "0", "-1.5", "0.5"),
    ],
)
def test_coordinate_distance_table(ctx, kind, x, g, expected):
    assert coordinate_distance(kind, ctx.scalar(x), ctx.scalar(g)) == ctx.scalar(expected)


def test_residual_combines_coordinates_euclidean(ctx):
    P = builtin("ex2ii", ctx)
    x = ctx.vector([1, -1])
    f1, f2 = P.f.eval(x)
    expected = ctx.mp.sqrt((f1 + 1) ** 2 + (f2 - 1) ** 2)
    assert residual_distance(P, x) == expected


def test_residual_dimension_mismatch(ctx):
    with pytest.raises(DimensionMismatch):
        residual_distance(builtin("ex2i", ctx), ctx.vector([1]))


def test_unknown_problem(ctx):
    with pytest.raises(UnknownProblem):
        builtin("ex3", ctx)


def test_parameter_overrides(ctx):
    mp = ctx.mp
    P = builtin("ex2i", ctx, p="0", q1="1", q2="1")
    assert P.exact_solution == (0, 0)
    assert P.params["p"] == 0
    with pytest.raises(ValueError):
        builtin("ex1i", ctx, p="1")
    with pytest.raises(ValueError):
        builtin("ex2i", ctx, q1="-1")
    Q = builtin("ex2i", ctx, p="1")
    assert residual_distance(Q, Q.exact_solution) <= ctx.eps(12)
    assert Q.exact_solution[0] == mp.log(mp.mpf("0.1") * mp.mpf("0.2")) / 2 + 1


def test_jacobian_at_3_0(ctx):
    mp = ctx.mp
    J = builtin("ex2i", ctx).f.jacobian(ctx.vector([3, 0]))
    assert J == ((1, -1), (1, 1))
    J = builtin("ex2i", ctx).f.jacobian(ctx.vector([1, -1]))
    assert J[0][0] == mp.exp(-1) and J[1][0] == mp.exp(-3)


# -- derivative checks against central differences ------------------------------

FD = PrecisionContext(100)
STEP = FD.scalar("1e-20")


def _points(P, rng, n=10):
    return [tuple(FD.scalar(rng.uniform(-2, 2)) for _ in range(P.dim)) for _ in range(n)]


def _agree(a, b, digits):
    mp = FD.mp
    scale = max(abs(a), abs(b), mp.mpf("1e-30"))
    return abs(a - b) / scale < mp.mpf(10) ** -digits


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_jacobian_matches_finite_differences(name):
    P = builtin(name, FD)
    rng = random.Random(zlib.crc32(name.encode()))
    for x in _points(P, rng):
        J = P.f.jacobian(x)
        for j in range(P.dim):
            xp = tuple(v + STEP if i == j else v for i, v in enumerate(x))
            xm = tuple(v - STEP if i == j else v for i, v in enumerate(x))
            fp, fm = P.f.eval(xp), P.f.eval(xm)
            for i in range(P.dim):
                assert _agree(J[i][j], (fp[i] - fm[i]) / (2 * STEP), 30)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_second_directional_matches_finite_differences(name):
    P = builtin(name, FD)
    rng = random.Random(1 + zlib.crc32(name.encode()))
    for x in _points(P, rng):
        h = tuple(FD.scalar(rng.uniform(-1, 1)) for _ in range(P.dim))
        S = P.f.second_directional(x, h)
        xp = tuple(a + STEP * b for a, b in zip(x, h))
        xm = tuple(a - STEP * b for a, b in zip(x, h))
        Jp, Jm = P.f.jacobian(xp), P.f.jacobian(xm)
        for i in range(P.dim):
            for j in range(P.dim):
                assert _agree(S[i][j], (Jp[i][j] - Jm[i][j]) / (2 * STEP), 30)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_second_directional_bilinear_and_symmetric(name):
    P = builtin(name, FD)
    rng = random.Random(5)
    mp = FD.mp
    for x in _points(P, rng, 5):
        h1 = tuple(FD.scalar(rng.uniform(-1, 1)) for _ in range(P.dim))
        h2 = tuple(FD.scalar(rng.uniform(-1, 1)) for _ in range(P.dim))
        a, b = FD.scalar(rng.uniform(-3, 3)), FD.scalar(rng.uniform(-3, 3))
        comb = tuple(a * u + b * v for u, v in zip(h1, h2))
        S = P.f.second_directional(x, comb)
        S1, S2 = P.f.second_directional(x, h1), P.f.second_directional(x, h2)
        for i in range(P.dim):
            for j in range(P.dim):
                assert abs(S[i][j] - (a * S1[i][j] + b * S2[i][j])) <= FD.eps(5) * (1 + abs(S[i][j]))
        lhs = matvec(S1, h2)
        rhs = matvec(S2, h1)
        for u, v in zip(lhs, rhs):
            assert abs(u - v) <= FD.eps(5) * (1 + abs(u))
        assert mp.isfinite(S[0][0])


@pytest.mark.parametrize("name", ["ex2i", "ex2ii"])
def test_jacobian_leading_minors_positive(name):
    P = builtin(name, FD)
    rng = random.Random(11)
    for x in _points(P, rng, 20):
        J = P.f.jacobian(x)
        assert J[0][0] > 0
        assert J[0][0] * J[1][1] - J[0][1] * J[1][0] > 0


def test_set_valued_map_contains(ctx):
    F = SetValuedMap((BranchKind.F2, BranchKind.F1))
    assert F.contains(ctx.vector([0, 0]), ctx.vector(["0.5", 7]))
    assert not F.contains(ctx.vector([1, 0]), ctx.vector([-1, 0]))
    assert F.contains(ctx.vector([1, 2]), ctx.vector([1, 0]))
