"""Newton-type iteration functions and the per-order run loop.

Six iteration functions share one run loop:

* classic Newton                 ``x - J(x)^-1 f(x)``
* fractional Newton-Raphson      ``x - J_a(x)^-1 f(x)`` with a fixed order ``a``
* fractional Newton              same, but the order drops to 1 near a root
  (``|f(x)| < delta``) or at the origin
* fractional quasi-Newton        ``x - Q(x)^-1 f(x)``, ``Q`` the fractional
  Jacobian of the affine map ``g(x) = f(x0) + J(x0) x``
* fractional pseudo-Newton       ``x - P(x) f(x)``, ``P`` diagonal, no solve
* parallel chord                 ``x - f(x) / m``
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import FracRootError, PreconditionError
from .expr import SystemF
from .fracderiv import DEFAULT_N_TRUNC, DerivKind, caputo_term, frac_jacobian, rl_term
from .linalg import norm2, solve

__all__ = [
    "SolverKind", "SolverConfig", "Outcome", "TraceRow", "RunRecord",
    "alpha_switch", "beta_switch", "step_classic_newton", "step_frac_newton",
    "step_quasi", "step_pseudo", "pseudo_scaling", "quasi_matrix", "step_chord",
    "run", "is_admissible_order",
]


class SolverKind(enum.Enum):
    CLASSIC_NEWTON = "newton"
    FRAC_NEWTON_RAPHSON = "frac-newton-raphson"
    FRAC_NEWTON = "frac-newton"
    FRAC_QUASI_NEWTON = "quasi"
    FRAC_PSEUDO_NEWTON = "pseudo"
    PARALLEL_CHORD = "chord"

    @property
    def fractional(self) -> bool:
        return self not in (SolverKind.CLASSIC_NEWTON, SolverKind.PARALLEL_CHORD)


class Outcome(enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules and method parameters.

    ``chord_slope`` of ``None`` means "use the diagonal of the classic
    Jacobian at x0".
    """

    tol: float = 1e-4
    max_iter: int = 40
    delta: float = 0.5
    div_bound: float = 1e6
    eps_shift: float = 1e-3
    chord_slope: float | None = None
    deriv_kind: DerivKind = DerivKind.RIEMANN_LIOUVILLE
    n_trunc: int = DEFAULT_N_TRUNC

    def __post_init__(self):
        if not 0 < self.tol < self.delta < 1:
            raise ValueError(f"need 0 < tol < delta < 1, got tol={self.tol}, delta={self.delta}")
        if self.max_iter <= 1:
            raise ValueError("max_iter must be > 1")
        if not self.div_bound > max(1.0, 1.0 / self.tol):
            raise ValueError("div_bound must exceed max(1, 1/tol)")
        if not 0 < self.eps_shift < 1:
            raise ValueError("eps_shift must be small and positive")
        if self.chord_slope is not None and self.chord_slope == 0:
            raise ValueError("chord_slope must be nonzero")
        if self.n_trunc < 1:
            raise ValueError("n_trunc must be >= 1")
        if isinstance(self.deriv_kind, str):
            object.__setattr__(self, "deriv_kind", DerivKind(self.deriv_kind))


class TraceRow(NamedTuple):
    iteration: int
    alpha_eff: float
    x: tuple[complex, ...]
    residual: float


@dataclass
class RunRecord:
    """Outcome of one run at a fixed order ``alpha``.

    ``iterations`` is the number of steps taken; ``last_step`` is the norm
    of the final step ``|x_R - x_{R-1}|``.
    """

    alpha: float
    outcome: Outcome
    iterations: int
    final_x: tuple[complex, ...]
    residual: float
    last_step: float = math.nan
    trace: list[TraceRow] | None = None
    reason: str | None = None

    @property
    def converged(self) -> bool:
        return self.outcome is Outcome.CONVERGED


def is_admissible_order(alpha: float) -> bool:
    return -2 < alpha < 2 and alpha not in (-1, 0, 1)


def alpha_switch(alpha: float, x: Sequence[complex], fx_norm: float, delta: float) -> float:
    """Order actually used by the fractional Newton method at ``x``.

    Falls back to 1 (classic Newton) once ``|f(x)| < delta`` and at the origin.
    """
    if fx_norm < delta or norm2(x) == 0:
        return 1.0
    return alpha


def beta_switch(alpha: float, xj: complex) -> float:
    return alpha if abs(xj) != 0 else 1.0


def _sub(x: Sequence[complex], y: Sequence[complex]) -> tuple[complex, ...]:
    return tuple(a - b for a, b in zip(x, y))


def step_classic_newton(f: SystemF, x: Sequence[complex], fx: Sequence[complex] | None = None):
    if fx is None:
        fx = f.eval(x)
    return _sub(x, solve(f.jacobian(x), fx))


def step_frac_newton(f: SystemF, x: Sequence[complex], alpha_eff: float, cfg: SolverConfig,
                     fx: Sequence[complex] | None = None) -> tuple[complex, ...]:
    """``x - J_alpha(x)^-1 f(x)``; ``alpha_eff == 1`` is exactly a Newton step."""
    if fx is None:
        fx = f.eval(x)
    jac = frac_jacobian(f, alpha_eff, x, cfg.deriv_kind, cfg.n_trunc)
    return _sub(x, solve(jac, fx))


def _const_linear_derivs(beta: float, xj: complex, kind: DerivKind) -> tuple[complex, complex]:
    # order-beta derivatives of 1 and of x_j, evaluated at x_j
    if beta == 1:
        return 0j, 1 + 0j
    term = rl_term if kind is DerivKind.RIEMANN_LIOUVILLE else caputo_term
    return term(1, 0.0, beta, xj), term(1, 1.0, beta, xj)


def quasi_matrix(x: Sequence[complex], j0: Sequence[Sequence[complex]], f0: Sequence[complex],
                 alpha: float, kind: DerivKind) -> list[list[complex]]:
    """Fractional Jacobian of ``g(x) = f0 + J0 x``.

    For column ``j`` everything in ``g_k`` that does not involve ``x_j`` is
    a constant, evaluated at the current ``x``.
    """
    n = len(x)
    derivs = [_const_linear_derivs(beta_switch(alpha, x[j]), x[j], kind) for j in range(n)]
    q = []
    for k in range(n):
        full = f0[k] + sum(j0[k][l] * x[l] for l in range(n))
        row = []
        for j in range(n):
            const_part = full - j0[k][j] * x[j]
            d_const, d_lin = derivs[j]
            row.append(const_part * d_const + j0[k][j] * d_lin)
        q.append(row)
    return q


def step_quasi(f: SystemF, x: Sequence[complex], x0: Sequence[complex],
               j0: Sequence[Sequence[complex]], f0: Sequence[complex], alpha: float,
               cfg: SolverConfig, fx: Sequence[complex] | None = None) -> tuple[complex, ...]:
    del x0  # g is fully determined by f0 and J0
    if fx is None:
        fx = f.eval(x)
    return _sub(x, solve(quasi_matrix(x, j0, f0, alpha, cfg.deriv_kind), fx))


def pseudo_scaling(x: Sequence[complex], alpha: float, eps_shift: float,
                   kind: DerivKind = DerivKind.RIEMANN_LIOUVILLE) -> list[complex]:
    """Diagonal of ``P``: order-beta derivative of the constant 1 plus the shift."""
    return [_const_linear_derivs(beta_switch(alpha, xj), xj, kind)[0] + eps_shift for xj in x]


def step_pseudo(f: SystemF, x: Sequence[complex], alpha: float, cfg: SolverConfig,
                fx: Sequence[complex] | None = None) -> tuple[complex, ...]:
    if fx is None:
        fx = f.eval(x)
    diag = pseudo_scaling(x, alpha, cfg.eps_shift, cfg.deriv_kind)
    return tuple(xj - pj * fj for xj, pj, fj in zip(x, diag, fx))


def step_chord(f: SystemF, x: Sequence[complex], cfg: SolverConfig,
               slope: float | Sequence[complex] | None = None,
               fx: Sequence[complex] | None = None) -> tuple[complex, ...]:
    m = cfg.chord_slope if slope is None else slope
    if m is None:
        raise ValueError("parallel chord needs a slope")
    if fx is None:
        fx = f.eval(x)
    slopes = [m] * len(x) if not isinstance(m, Sequence) else list(m)
    return tuple(xj - fj / mj for xj, fj, mj in zip(x, fx, slopes))


def _finite(v: Sequence[complex]) -> bool:
    return all(math.isfinite(c.real) and math.isfinite(c.imag) for c in v)


def run(f: SystemF, kind: SolverKind, alpha: float, x0: Sequence[complex],
        cfg: SolverConfig, trace: bool = False) -> RunRecord:
    """Iterate one method at order ``alpha`` from ``x0``.

    Stops as soon as ``|f(x)|_2 <= tol`` (converged), ``>= div_bound`` or
    non-finite, or when a step fails (diverged).  Otherwise the run is
    exhausted after ``max_iter`` steps.  Trace rows carry the order that
    produced each iterate; row 0 is ``x0`` with the nominal order.
    """
    kind = SolverKind(kind)
    x = tuple(complex(v) for v in x0)
    if len(x) != f.n:
        raise PreconditionError(f"x0 has dimension {len(x)}, system has {f.n}")
    if kind.fractional:
        if norm2(x) == 0:
            raise PreconditionError("fractional methods need a nonzero initial condition")
        if not is_admissible_order(alpha):
            raise PreconditionError(f"order {alpha} outside (-2, 2) minus {{-1, 0, 1}}")

    rows: list[TraceRow] | None = [] if trace else None

    def finish(outcome, iterations, residual, last_step=math.nan, reason=None):
        return RunRecord(alpha, outcome, iterations, x, residual, last_step, rows, reason)

    try:
        fx = f.eval(x)
    except (FracRootError, ArithmeticError) as exc:
        return finish(Outcome.DIVERGED, 0, math.inf, reason=str(exc))
    residual = norm2(fx)
    if rows is not None:
        rows.append(TraceRow(0, float(alpha), x, residual))
    if not math.isfinite(residual) or residual >= cfg.div_bound:
        return finish(Outcome.DIVERGED, 0, residual, reason="initial residual above bound")
    if residual <= cfg.tol:
        return finish(Outcome.CONVERGED, 0, residual, 0.0)

    slope = None
    j0 = f0 = None
    if kind is SolverKind.FRAC_QUASI_NEWTON:
        j0 = f.jacobian(x)
        f0 = list(fx)
    elif kind is SolverKind.PARALLEL_CHORD:
        if cfg.chord_slope is not None:
            slope = cfg.chord_slope
        else:
            jac = f.jacobian(x)
            slope = [jac[j][j] for j in range(f.n)]
            if any(s == 0 for s in slope):
                raise PreconditionError("classic Jacobian at x0 has a zero diagonal entry")

    last_step = math.nan
    for i in range(1, cfg.max_iter + 1):
        try:
            if kind is SolverKind.FRAC_NEWTON:
                a_eff = alpha_switch(alpha, x, residual, cfg.delta)
                new = step_frac_newton(f, x, a_eff, cfg, fx)
            elif kind is SolverKind.FRAC_NEWTON_RAPHSON:
                a_eff = alpha
                new = step_frac_newton(f, x, a_eff, cfg, fx)
            elif kind is SolverKind.CLASSIC_NEWTON:
                a_eff = 1.0
                new = step_classic_newton(f, x, fx)
            elif kind is SolverKind.FRAC_QUASI_NEWTON:
                a_eff = alpha
                new = step_quasi(f, x, x0, j0, f0, alpha, cfg, fx)
            elif kind is SolverKind.FRAC_PSEUDO_NEWTON:
                a_eff = alpha
                new = step_pseudo(f, x, alpha, cfg, fx)
            else:
                a_eff = math.nan
                new = step_chord(f, x, cfg, slope, fx)
            if not _finite(new):
                raise OverflowError("non-finite iterate")
            last_step = norm2(_sub(new, x))
            x = new
            fx = f.eval(x)
            residual = norm2(fx)
        except (FracRootError, ArithmeticError) as exc:
            return finish(Outcome.DIVERGED, i, residual, last_step, f"{type(exc).__name__}: {exc}")
        if rows is not None:
            rows.append(TraceRow(i, float(a_eff), x, residual))
        if not math.isfinite(residual) or residual >= cfg.div_bound:
            return finish(Outcome.DIVERGED, i, residual, last_step, "residual above bound")
        if residual <= cfg.tol:
            return finish(Outcome.CONVERGED, i, residual, last_step)
    return finish(Outcome.EXHAUSTED, cfg.max_iter, residual, last_step)
