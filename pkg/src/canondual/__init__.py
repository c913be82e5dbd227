"""Canonical duality solver for nonconvex problems with quadratic-operator structure."""

from .assembly import (
    AssembledQuadratic,
    DualPoint,
    assemble,
    eval_dual,
    eval_xi1,
    primal_from_dual,
    stationarity_residual,
)
from .model import (
    CanonicalFunction,
    CanonicalTerm,
    Exponential,
    Problem,
    QuadraticOperator,
    ShiftedQuadratic,
    double_well_example,
    eval_constraint,
    eval_objective,
    eval_operator,
)
from .solver import (
    Classification,
    CriticalPoint,
    SolverConfig,
    classify,
    select_global,
    solve_critical_points,
    verify_gap,
)

__version__ = "0.1.0"
