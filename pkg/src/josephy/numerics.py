"""Arbitrary-precision scalars, vectors and matrices.

Scalars are ``mpf`` values of a private :class:`mpmath.MPContext`, so two
:class:`PrecisionContext` objects with different digit counts never interfere
with each other (and nothing touches the global ``mpmath.mp``).

Vectors are tuples of scalars and matrices are tuples of row tuples; both are
immutable once built.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath

from .errors import DimensionMismatch, SingularMatrix

DEFAULT_DIGITS = 400
MIN_DIGITS = 16

Vector = tuple
Matrix = tuple


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision in significant decimal digits."""

    digits: int = DEFAULT_DIGITS
    mp: mpmath.ctx_mp.MPContext = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.digits) != self.digits or self.digits < MIN_DIGITS:
            raise ValueError(f"digits must be an integer >= {MIN_DIGITS}, got {self.digits!r}")
        ctx = mpmath.MPContext()
        ctx.dps = int(self.digits)
        object.__setattr__(self, "mp", ctx)

    def __reduce__(self):
        return (PrecisionContext, (self.digits,))

    # -- construction -------------------------------------------------------
    def scalar(self, value) -> "mpmath.mpf":
        """Convert ``value`` to a working-precision scalar.

        Strings are parsed directly at full precision; floats are taken at
        their exact binary value.
        """
        if isinstance(value, str):
            value = value.strip()
            if value.lower() in ("inf", "+inf", "infinity"):
                return self.mp.inf
            if value.lower() in ("-inf", "-infinity"):
                return -self.mp.inf
        return self.mp.mpf(value)

    def vector(self, values: Iterable) -> Vector:
        v = tuple(self.scalar(x) for x in values)
        if not v:
            raise DimensionMismatch("vectors must have positive dimension")
        return v

    def matrix(self, rows: Iterable[Iterable]) -> Matrix:
        m = tuple(tuple(self.scalar(x) for x in row) for row in rows)
        if not m or not m[0]:
            raise DimensionMismatch("matrices must have positive shape")
        if any(len(row) != len(m[0]) for row in m):
            raise DimensionMismatch("ragged matrix rows")
        return m

    def identity(self, n: int) -> Matrix:
        one, zero = self.mp.one, self.mp.zero
        return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))

    def zeros(self, n: int) -> Vector:
        return (self.mp.zero,) * n

    def eps(self, offset: int = 0):
        """``10**(offset - digits)``, the scale used by all tolerances."""
        return self.mp.mpf(10) ** (offset - self.digits)

    @property
    def inf(self):
        return self.mp.inf


# -- elementary vector/matrix algebra ---------------------------------------

def shape(A: Matrix) -> tuple[int, int]:
    return len(A), len(A[0])


def add(u: Vector, v: Vector) -> Vector:
    _check_same(u, v)
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Vector, v: Vector) -> Vector:
    _check_same(u, v)
    return tuple(a - b for a, b in zip(u, v))


def scale(s, v: Vector) -> Vector:
    return tuple(s * a for a in v)


def matvec(A: Matrix, v: Vector) -> Vector:
    if len(A[0]) != len(v):
        raise DimensionMismatch(f"matrix with {len(A[0])} columns applied to vector of dim {len(v)}")
    out = []
    for row in A:
        s = row[0] * v[0]
        for a, b in zip(row[1:], v[1:]):
            s += a * b
        out.append(s)
    return tuple(out)


def matadd(A: Matrix, B: Matrix) -> Matrix:
    if shape(A) != shape(B):
        raise DimensionMismatch(f"shapes {shape(A)} and {shape(B)} differ")
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def matscale(s, A: Matrix) -> Matrix:
    return tuple(tuple(s * a for a in row) for row in A)


def euclidean_norm(v: Vector, ctx: PrecisionContext):
    """sqrt(sum v_i**2); 0 for the zero vector."""
    mp = ctx.mp
    s = mp.zero
    for a in v:
        s += a * a
    return mp.sqrt(s)


def max_norm(v: Vector, ctx: PrecisionContext):
    mp = ctx.mp
    return max((abs(a) for a in v), default=mp.zero)


def solve_linear(A: Matrix, b: Vector, ctx: PrecisionContext) -> Vector:
    """Solve ``A x = b`` by Gaussian elimination with partial pivoting.

    Raises SingularMatrix when a pivot falls below ``10**(8-digits)`` times
    the largest entry of ``A``.
    """
    n = len(A)
    if n == 0 or any(len(row) != n for row in A):
        raise DimensionMismatch("solve_linear needs a square matrix")
    if len(b) != n:
        raise DimensionMismatch(f"right-hand side has dim {len(b)}, expected {n}")
    mp = ctx.mp
    scale_ = max(abs(a) for row in A for a in row)
    if scale_ == 0:
        raise SingularMatrix("zero matrix")
    threshold = ctx.eps(8) * scale_

    M = [list(row) for row in A]
    rhs = list(b)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if abs(M[piv][col]) < threshold:
            raise SingularMatrix(f"pivot {mp.nstr(M[piv][col], 5)} below threshold in column {col}")
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            rhs[col], rhs[piv] = rhs[piv], rhs[col]
        p = M[col][col]
        for r in range(col + 1, n):
            factor = M[r][col] / p
            if factor == 0:
                continue
            for c in range(col + 1, n):
                M[r][c] -= factor * M[col][c]
            M[r][col] = mp.zero
            rhs[r] -= factor * rhs[col]

    x = [mp.zero] * n
    for i in range(n - 1, -1, -1):
        s = rhs[i]
        for j in range(i + 1, n):
            s -= M[i][j] * x[j]
        x[i] = s / M[i][i]
    return tuple(x)


# -- string serialization ----------------------------------------------------

def format_scalar(x, ctx: PrecisionContext, digits: int | None = None) -> str:
    """Decimal string with ``digits`` significant figures.

    Fixed notation for magnitudes in [1e-4, 1e6), scientific otherwise.
    """
    mp = ctx.mp
    if mp.isinf(x):
        return "inf" if x > 0 else "-inf"
    n = ctx.digits if digits is None else digits
    return mp.nstr(x, n, min_fixed=-4, max_fixed=6)


def parse_scalar(text: str, ctx: PrecisionContext):
    return ctx.scalar(text)


def format_fixed(x, decimals: int, ctx: PrecisionContext) -> str:
    """Round to ``decimals`` places and print in fixed notation (``-2.893750``)."""
    mp = ctx.mp
    if mp.isinf(x):
        return "inf" if x > 0 else "-inf"
    n = int(mp.nint(x * mp.mpf(10) ** decimals))
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), 10**decimals)
    if decimals == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{decimals}d}"


def format_sci(x, decimals: int, ctx: PrecisionContext) -> str:
    """Scientific notation with ``decimals`` mantissa decimals (``1.95e-292``).

    Works far outside the double-precision exponent range.
    """
    mp = ctx.mp
    if mp.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return f"{0:.{decimals}f}e+00"
    sign = "-" if x < 0 else ""
    a = abs(x)
    e = int(mp.floor(mp.log10(a)))
    m = int(mp.nint(a / mp.mpf(10) ** (e - decimals)))
    # log10 may be off by one near powers of ten; renormalize the mantissa
    while m >= 10 ** (decimals + 1):
        e += 1
        m = int(mp.nint(a / mp.mpf(10) ** (e - decimals)))
    while m < 10**decimals:
        e -= 1
        m = int(mp.nint(a / mp.mpf(10) ** (e - decimals)))
    digits = str(m)
    mant = digits[0] + ("." + digits[1:] if decimals else "")
    return f"{sign}{mant}e{'+' if e >= 0 else '-'}{abs(e):02d}"


def _check_same(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise DimensionMismatch(f"dimensions {len(u)} and {len(v)} differ")
