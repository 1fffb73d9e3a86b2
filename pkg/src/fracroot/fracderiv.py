"""Fractional power series and termwise Riemann-Liouville / Caputo operators.

Every operator here has lower limit 0 and acts on finite sums
``sum_k c_k * x**mu_k`` through the closed-form rule for ``x**mu``::

    D^a x^mu = Gamma(mu+1)/Gamma(mu-a+1) * x^(mu-a)                 mu > -1
    D^a x^mu = (-1)^a * Gamma(-(mu+a))/Gamma(-mu) * x^(mu-a)        mu <= -1

Negative orders give the fractional integral of the same closed form.
A pole of the denominator gamma makes the term vanish.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from . import expr as ex
from .errors import (DivByZeroError, DomainError, PoleError, SingularPointError,
                     UnsupportedExponent, UnsupportedExpr)
from .specfun import gamma, principal_pow, rgamma

__all__ = [
    "DerivKind", "FracSeries", "SeriesAccuracyWarning", "DEFAULT_N_TRUNC",
    "expand", "rl_term", "caputo_term", "frac_deriv_series", "frac_jacobian",
]

DEFAULT_N_TRUNC = 40
_LARGE_X = 10.0


class DerivKind(enum.Enum):
    RIEMANN_LIOUVILLE = "rl"
    CAPUTO = "caputo"


class SeriesAccuracyWarning(RuntimeWarning):
    """Truncated Taylor series evaluated far from the origin."""


@dataclass(frozen=True)
class FracSeries:
    """``sum(c * x**mu for c, mu in terms)`` with strictly increasing ``mu``.

    ``truncated`` records whether a Taylor expansion was cut off while the
    series was built, i.e. whether it is only an approximation.
    """

    terms: tuple[tuple[complex, float], ...] = ()
    truncated: bool = False

    @classmethod
    def from_mapping(cls, coeffs: Mapping[float, complex], truncated: bool = False) -> FracSeries:
        terms = tuple((complex(c), float(mu)) for mu, c in sorted(coeffs.items()) if c != 0)
        return cls(terms, truncated)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, float]]) -> FracSeries:
        acc: dict[float, complex] = {}
        for c, mu in terms:
            mu = float(mu) + 0.0
            acc[mu] = acc.get(mu, 0j) + complex(c)
        return cls.from_mapping(acc)

    def __add__(self, other: FracSeries) -> FracSeries:
        merged = FracSeries.from_terms(self.terms + other.terms)
        return FracSeries(merged.terms, self.truncated or other.truncated)

    def __len__(self) -> int:
        return len(self.terms)

    def __call__(self, x) -> complex:
        return sum((c * principal_pow(x, mu) for c, mu in self.terms), 0j)


# --------------------------------------------------------------------------
# expansion of expression trees

# derivative cycles at the expansion point a: f^(k)(a) = cycle[k % len](a)
_DERIV_CYCLES = {
    "sin": (lambda a: ex.FUNCTIONS["sin"](a), lambda a: ex.FUNCTIONS["cos"](a),
            lambda a: -ex.FUNCTIONS["sin"](a), lambda a: -ex.FUNCTIONS["cos"](a)),
    "cos": (lambda a: ex.FUNCTIONS["cos"](a), lambda a: -ex.FUNCTIONS["sin"](a),
            lambda a: -ex.FUNCTIONS["cos"](a), lambda a: ex.FUNCTIONS["sin"](a)),
    "exp": (lambda a: ex.FUNCTIONS["exp"](a),),
    "sinh": (lambda a: ex.FUNCTIONS["sinh"](a), lambda a: ex.FUNCTIONS["cosh"](a)),
    "cosh": (lambda a: ex.FUNCTIONS["cosh"](a), lambda a: ex.FUNCTIONS["sinh"](a)),
}

_Poly = dict  # exponent -> coefficient


def _key(mu: float) -> float:
    return float(mu) + 0.0  # folds -0.0 into 0.0


def _merge(a: _Poly, b: _Poly, sign: int = 1) -> _Poly:
    out = dict(a)
    for mu, c in b.items():
        out[mu] = out.get(mu, 0j) + sign * c
    return out


def _convolve(a: _Poly, b: _Poly) -> _Poly:
    out: _Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            k = _key(ma + mb)
            out[k] = out.get(k, 0j) + ca * cb
    return out


def _scalar_pow(c: complex, p: float) -> complex:
    if p.is_integer() and abs(p) <= 64:
        k = int(p)
        if k >= 0:
            acc = 1 + 0j
            for _ in range(k):
                acc *= c
            return acc
        acc = 1 + 0j
        for _ in range(-k):
            acc *= c
        return 1 / acc
    return principal_pow(c, p)


class _Expander:
    def __init__(self, var: int, point: Sequence[complex], n_trunc: int):
        self.var = var
        self.point = point
        self.n_trunc = n_trunc
        self.truncated = False

    def series(self, node: ex.Expr) -> _Poly:
        if isinstance(node, ex.Const):
            return {0.0: complex(node.value)}
        if isinstance(node, ex.Var):
            if node.index == self.var:
                return {1.0: 1 + 0j}
            return {0.0: self.point[node.index - 1]}
        if isinstance(node, ex.Neg):
            return {mu: -c for mu, c in self.series(node.arg).items()}
        if isinstance(node, ex.Add):
            return _merge(self.series(node.left), self.series(node.right))
        if isinstance(node, ex.Sub):
            return _merge(self.series(node.left), self.series(node.right), -1)
        if isinstance(node, ex.Mul):
            return _convolve(self.series(node.left), self.series(node.right))
        if isinstance(node, ex.Div):
            num = self.series(node.left)
            den = {mu: c for mu, c in self.series(node.right).items() if c != 0}
            if not den:
                raise DivByZeroError("division by an identically zero denominator")
            if len(den) != 1:
                raise UnsupportedExpr(
                    f"division by a non-monomial in x{self.var}: {ex.to_text(node.right)}")
            (mu, c), = den.items()
            return {_key(m - mu): v / c for m, v in num.items()}
        if isinstance(node, ex.Pow):
            return self._pow(node)
        if isinstance(node, ex.Call):
            return self._call(node)
        raise TypeError(f"not an expression node: {node!r}")

    def _pow(self, node: ex.Pow) -> _Poly:
        base = {mu: c for mu, c in self.series(node.base).items() if c != 0}
        p = float(node.exponent)
        if not base:
            if p > 0:
                return {}
            if p == 0:
                return {0.0: 1 + 0j}
            raise DivByZeroError("zero raised to a negative power")
        if len(base) == 1:
            (mu, c), = base.items()
            return {_key(mu * p): _scalar_pow(c, p)}
        if p.is_integer() and p >= 0:
            out: _Poly = {0.0: 1 + 0j}
            for _ in range(int(p)):
                out = _convolve(out, base)
            return out
        raise UnsupportedExpr(
            f"non-integer power of a polynomial in x{self.var}: {ex.to_text(node)}")

    def _call(self, node: ex.Call) -> _Poly:
        arg = {mu: c for mu, c in self.series(node.arg).items() if c != 0}
        if any(mu < 0 for mu in arg):
            raise UnsupportedExpr(
                f"{node.func} of an argument singular at x{self.var} = 0: {ex.to_text(node)}")
        a = arg.pop(0.0, 0j)
        fn = ex.FUNCTIONS[node.func]
        if not arg:
            return {0.0: fn(a)}
        # f(a + u) = sum_k f^(k)(a)/k! * u^k, keeping n_trunc nonzero k >= 1 terms
        cycle = _DERIV_CYCLES[node.func]
        derivs = [cycle[k % len(cycle)](a) for k in range(len(cycle))]
        out: _Poly = {0.0: derivs[0]}
        u_pow: _Poly = {0.0: 1 + 0j}
        fact = 1.0
        kept = 0
        k = 0
        while kept < self.n_trunc:
            k += 1
            u_pow = _convolve(u_pow, arg)
            fact *= k
            d = derivs[k % len(derivs)]
            if d == 0:
                continue
            kept += 1
            scale = d / fact
            for mu, c in u_pow.items():
                out[mu] = out.get(mu, 0j) + scale * c
        self.truncated = True
        return out


def expand(e: ex.Expr, var: int, at_others: Sequence[complex],
           n_trunc: int = DEFAULT_N_TRUNC) -> FracSeries:
    """Fractional power series of ``e`` in ``x_var`` (1-based).

    The other variables are frozen at the matching entries of ``at_others``
    (the entry for ``x_var`` itself is ignored).  Polynomials expand exactly;
    each elementary function call keeps ``n_trunc`` non-constant Taylor terms.
    """
    if n_trunc < 1:
        raise ValueError("n_trunc must be >= 1")
    point = tuple(complex(v) for v in at_others)
    expander = _Expander(var, point, n_trunc)
    coeffs = expander.series(e)
    return FracSeries.from_mapping(coeffs, expander.truncated)


# --------------------------------------------------------------------------
# termwise operators

@lru_cache(maxsize=65536)
def _rl_factor(mu: float, alpha: float) -> complex:
    if mu > -1:
        return complex(gamma(mu + 1.0) * rgamma(mu - alpha + 1.0))
    return principal_pow(-1.0, alpha) * (gamma(-(mu + alpha)) / gamma(-mu))


@lru_cache(maxsize=65536)
def _caputo_factor(mu: float, alpha: float) -> complex:
    if alpha < 0 or alpha.is_integer():
        return _rl_factor(mu, alpha)
    n = math.floor(alpha) + 1
    if mu <= n - 1:
        if mu.is_integer() and mu >= 0:
            return 0j
        raise UnsupportedExponent(
            f"Caputo derivative of order {alpha} undefined for x^{mu}")
    return _rl_factor(mu, alpha)


_FACTORS = {
    "rl": _rl_factor,
    "caputo": _caputo_factor,
}


def _term(factor_fn, coeff: complex, mu: float, alpha: float, x: complex) -> complex:
    if x == 0:
        raise DomainError("fractional operator evaluated at x = 0")
    if coeff == 0:
        return 0j
    factor = factor_fn(float(mu), float(alpha))
    if factor == 0:
        return 0j
    return coeff * factor * principal_pow(x, mu - alpha)


def rl_term(coeff: complex, mu: float, alpha: float, x: complex) -> complex:
    """Riemann-Liouville operator of order ``alpha`` applied to ``coeff * x**mu``."""
    return _term(_rl_factor, coeff, mu, alpha, x)


def caputo_term(coeff: complex, mu: float, alpha: float, x: complex) -> complex:
    """Caputo operator of order ``alpha`` applied to ``coeff * x**mu``.

    For ``alpha < 0`` this is the Riemann-Liouville integral.  For
    ``alpha > 0`` integer powers below ``n = floor(alpha) + 1`` are
    annihilated; non-integer and negative powers in that range raise
    UnsupportedExponent.
    """
    return _term(_caputo_factor, coeff, mu, alpha, x)


def frac_deriv_series(s: FracSeries, alpha: float, x: complex,
                      kind: DerivKind = DerivKind.RIEMANN_LIOUVILLE) -> complex:
    """Termwise operator on a whole series; equals the sum of the term rules."""
    factor_fn = _FACTORS[DerivKind(kind).value]
    x = complex(x)
    if x == 0:
        raise DomainError("fractional operator evaluated at x = 0")
    alpha = float(alpha)
    # x**p for every term from one logarithm; same branch as principal_pow
    if x.imag == 0 and x.real > 0:
        xr = x.real
        power = lambda p: math.pow(xr, p)  # noqa: E731
    elif x.imag == 0:
        power = lambda p: principal_pow(x, p)  # noqa: E731
    else:
        lx = cmath.log(x)
        power = lambda p: cmath.exp(p * lx)  # noqa: E731
    total = 0j
    for i, (c, mu) in enumerate(s.terms):
        try:
            factor = factor_fn(mu, alpha)
        except (PoleError, DomainError, UnsupportedExponent) as exc:
            raise type(exc)(f"term {i} (x^{mu}): {exc}") from exc
        if factor == 0 or c == 0:
            continue
        total += c * factor * power(mu - alpha)
    return total


def _expansion(f: ex.SystemF, k: int, j: int, x: Sequence[complex], n_trunc: int) -> FracSeries:
    # Expansions only depend on the frozen values of the variables that occur
    # in f_k, so polynomial-in-x_j components are expanded once per system.
    used = f.variables[k]
    frozen = tuple((i, x[i - 1]) for i in sorted(used) if i != j)
    cache = f.cache.setdefault("series", {})
    key = (k, j, frozen, n_trunc)
    s = cache.get(key)
    if s is None:
        s = expand(f.components[k], j, x, n_trunc)
        if len(cache) > 4096:
            cache.clear()
        cache[key] = s
    return s


def frac_jacobian(f: ex.SystemF, alpha: float, x: Sequence[complex],
                  kind: DerivKind = DerivKind.RIEMANN_LIOUVILLE,
                  n_trunc: int = DEFAULT_N_TRUNC) -> list[list[complex]]:
    """Matrix of fractional partials ``D_j^alpha f_k`` at ``x``.

    At ``alpha == 1`` this is exactly the classic Jacobian.
    """
    pt = tuple(complex(v) for v in x)
    if alpha == 1:
        return f.jacobian(pt)
    if len(pt) != f.n:
        raise ValueError(f"expected a point of dimension {f.n}, got {len(pt)}")
    for j, v in enumerate(pt, start=1):
        if v == 0:
            raise SingularPointError(f"x{j} = 0, fractional Jacobian undefined")
    rows = []
    for k in range(f.n):
        row = []
        for j in range(1, f.n + 1):
            s = _expansion(f, k, j, pt, n_trunc)
            xj = pt[j - 1]
            if s.truncated and abs(xj) > _LARGE_X:
                warnings.warn(
                    f"truncated series for component {k + 1} evaluated at |x{j}| = "
                    f"{abs(xj):.3g}; accuracy degrades", SeriesAccuracyWarning, stacklevel=2)
            row.append(frac_deriv_series(s, alpha, xj, kind))
        rows.append(row)
    return rows
