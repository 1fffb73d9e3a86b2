"""Fractional Newton-type methods for finding many roots from one initial guess."""

from .errors import (ArityError, DivByZeroError, DomainError, EmptyGridError, ExprSyntaxError,
                     FracRootError, PoleError, PreconditionError, SingularMatrixError,
                     SingularPointError, UnsupportedExponent, UnsupportedExpr)
from .expr import SystemF, classic_jacobian, eval_system, parse
from .fracderiv import DerivKind, FracSeries, caputo_term, expand, frac_jacobian, rl_term
from .linalg import norm2, solve
from .solvers import Outcome, RunRecord, SolverConfig, SolverKind, run
from .specfun import gamma, rgamma
from .sweep import AlphaGrid, RootRegistry, make_grid, offer, sweep

__version__ = "0.1.0"

__all__ = [
    "ArityError", "DivByZeroError", "DomainError", "EmptyGridError", "ExprSyntaxError",
    "FracRootError", "PoleError", "PreconditionError", "SingularMatrixError",
    "SingularPointError", "UnsupportedExponent", "UnsupportedExpr",
    "SystemF", "classic_jacobian", "eval_system", "parse",
    "DerivKind", "FracSeries", "caputo_term", "expand", "frac_jacobian", "rl_term",
    "norm2", "solve", "Outcome", "RunRecord", "SolverConfig", "SolverKind", "run",
    "gamma", "rgamma", "AlphaGrid", "RootRegistry", "make_grid", "offer", "sweep",
]
