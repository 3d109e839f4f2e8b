"""Josephy-Newton and Josephy-Halley solvers for generalized equations
``0 in f(x) + F(x)`` in arbitrary precision."""
from .errors import (
    DimensionMismatch,
    JosephyError,
    NoSolution,
    NotAdmissible,
    SingularMatrix,
    UnknownProblem,
    ZeroDerivative,
)
from .numerics import PrecisionContext, euclidean_norm, solve_linear
from .problems import BranchKind, ProblemInstance, SetValuedMap, SmoothMap, builtin, residual_distance
from .solver import IterationTrace, Method, SolveConfig, Status, StopMeasure, classical_halley_step, run
from .subproblem import SubproblemSpec, halley_operator, newton_operator, solve_inclusion

__version__ = "0.1.0"
