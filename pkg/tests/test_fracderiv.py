import math
import random
import warnings

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from fracroot.errors import (DivByZeroError, DomainError, PoleError, SingularPointError,
                             UnsupportedExponent, UnsupportedExpr)
from fracroot.expr import parse, parse_expr
from fracroot.fracderiv import (DerivKind, FracSeries, SeriesAccuracyWarning, caputo_term,
                                expand, frac_deriv_series, frac_jacobian, rl_term)

from conftest import POLY2D, SINE

RL = DerivKind.RIEMANN_LIOUVILLE
CAPUTO = DerivKind.CAPUTO


def _as_set(s: FracSeries, digits=12):
    return {(complex(round(c.real, digits), round(c.imag, digits)), mu) for c, mu in s.terms}


def _oracle_rl(coeff, mu, alpha, x):
    """Closed-form RL term in 50-digit arithmetic."""
    mpmath.mp.dps = 50
    mu_, a_, x_ = mpmath.mpf(mu), mpmath.mpf(alpha), mpmath.mpc(x)
    xp = mpmath.exp((mu_ - a_) * mpmath.log(x_))
    if mu > -1:
        val = mpmath.gamma(mu_ + 1) * mpmath.rgamma(mu_ - a_ + 1) * xp
    else:
        val = mpmath.exp(1j * mpmath.pi * a_) * mpmath.gamma(-(mu_ + a_)) / mpmath.gamma(-mu_) * xp
    return complex(coeff) * complex(val)


# ------------------------------------------------------------------ expand

def test_expand_polynomial_is_exact():
    s = expand(parse_expr("x^2 - 1", 1), 1, [0])
    assert _as_set(s) == {(-1, 0.0), (1, 2.0)}
    assert not s.truncated


def test_expand_sine_example():
    s = expand(parse_expr(SINE, 1), 1, [0], n_trunc=4)
    expected = {(-1.5, -1.0), (1, 1.0), (-1 / 6, 3.0), (1 / 120, 5.0), (-1 / 5040, 7.0)}
    assert _as_set(s) == {(complex(round(c, 12)), mu) for c, mu in expected}
    assert s.truncated


def test_expand_exponential_example():
    s = expand(parse_expr("exp(2*x) - e", 1), 1, [0], n_trunc=3)
    expected = {(1 - math.e, 0.0), (2, 1.0), (2, 2.0), (4 / 3, 3.0)}
    assert _as_set(s) == {(complex(round(c, 12)), mu) for c, mu in expected}


def test_expand_freezes_other_variables():
    s = expand(parse_expr("x1^2*x2 + x2^3", 2), 1, [99, 2])
    assert _as_set(s) == {(8, 0.0), (2, 2.0)}
    s = expand(parse_expr("sin(x1*x2)", 2), 1, [0, 3], n_trunc=2)
    # sin(3 x1) = 3 x1 - 4.5 x1^3 + ...
    assert _as_set(s) == {(3, 1.0), (-4.5, 3.0)}


def test_expand_fractional_powers_and_monomial_division():
    s = expand(parse_expr("x^(1/2) * (x + 2) / (4*x^3)", 1), 1, [0])
    assert _as_set(s) == {(0.5, -2.5), (0.25, -1.5)}


@pytest.mark.parametrize("src", ["1/(x + 1)", "(x + 1)^(1/2)", "sin(1/x)"])
def test_expand_rejects_non_series(src):
    with pytest.raises(UnsupportedExpr):
        expand(parse_expr(src, 1), 1, [0])


def test_expand_division_by_zero_constant():
    with pytest.raises(DivByZeroError):
        expand(parse_expr("x1 / x2", 2), 1, [1, 0])


def test_series_evaluates_to_expression():
    e = parse_expr("x^3 - 2*x + 5/x", 1)
    s = expand(e, 1, [0])
    assert s(1.7) == pytest.approx(1.7 ** 3 - 3.4 + 5 / 1.7)


# ---------------------------------------------------------------- term rules

@pytest.mark.parametrize("args, expected", [
    ((1, 1, 0.5, 1), 1.1283791670955126),
    ((1, 0, 0.5, 4), 0.28209479177387814),
    ((1, -1, 0.5, 1), 1.7724538509055159j),
    ((1, 2, 0.5, 1), 1.5045055561273502),
])
def test_rl_term_examples(args, expected):
    assert abs(rl_term(*args) - expected) <= 1e-12 * abs(expected)


@pytest.mark.parametrize("mu", [-1.7, -1.3, -1.0, -0.6, -0.25, 0.0, 0.5, 1.0, 2.0, 3.4, 7.0])
@pytest.mark.parametrize("alpha", [-1.9, -1.25, -0.5, -0.05, 0.3, 0.87611, 1.5, 1.98])
@pytest.mark.parametrize("x", [0.3, 2.5, -1.7, 1 + 2j, -0.4 - 0.9j])
def test_rl_term_matches_oracle(mu, alpha, x):
    try:
        exact = _oracle_rl(2 - 1j, mu, alpha, x)
    except (ValueError, ZeroDivisionError):
        pytest.skip("oracle pole")
    if not math.isfinite(abs(exact)):
        pytest.skip("oracle pole")
    try:
        got = rl_term(2 - 1j, mu, alpha, x)
    except PoleError:
        pytest.fail("unexpected pole")
    assert abs(got - exact) <= 1e-10 * max(1.0, abs(exact))


def test_rl_denominator_pole_gives_zero():
    # half-derivative of x^(-1/2) vanishes
    assert rl_term(1, -0.5, 0.5, 3.0) == 0
    assert rl_term(1, 0.3, 1.3, 2.0) == 0


def test_rl_numerator_pole_raises():
    with pytest.raises(PoleError):
        rl_term(1, -1.5, 1.5, 2.0)


def test_rl_at_origin_raises():
    with pytest.raises(DomainError):
        rl_term(1, 2, 0.5, 0)


def test_caputo_examples():
    assert caputo_term(5, 0, 0.5, 2) == 0
    assert caputo_term(1, 1, 0.5, 1) == pytest.approx(1.1283791670955126, rel=1e-13)
    assert caputo_term(1, 2, -0.5, 1) == rl_term(1, 2, -0.5, 1)
    # order 1.5 kills 1 and x
    assert caputo_term(3, 1, 1.5, 2) == 0
    assert caputo_term(1, 2, 1.5, 4) == pytest.approx(2 / math.gamma(1.5) * 2.0, rel=1e-13)


@pytest.mark.parametrize("mu, alpha", [(0.5, 1.5), (-0.5, 0.5), (-1.0, 0.3)])
def test_caputo_unsupported_exponents(mu, alpha):
    with pytest.raises(UnsupportedExponent):
        caputo_term(1, mu, alpha, 2.0)


@pytest.mark.parametrize("alpha", [-1.5, -0.3])
def test_caputo_integral_equals_rl(alpha):
    for mu in (0.0, 0.5, 1.0, 3.0):
        assert caputo_term(1.5, mu, alpha, 2.2) == rl_term(1.5, mu, alpha, 2.2)


# ---------------------------------------------------------------- series

def test_series_examples():
    s = FracSeries.from_terms([(-1, 0), (1, 2)])
    expected = math.gamma(3) / math.gamma(2.5) - 1 / math.gamma(0.5)
    assert frac_deriv_series(s, 0.5, 1, RL) == pytest.approx(expected, rel=1e-13)
    assert abs(frac_deriv_series(FracSeries.from_terms([(1, 2)]), 0.999999, 3) - 6) <= 1e-4
    assert frac_deriv_series(FracSeries(), 0.7, 1) == 0


def test_series_error_names_the_term():
    s = FracSeries.from_terms([(1, 2), (1, -1.5)])
    # terms are stored by increasing exponent, so x^-1.5 is term 0
    with pytest.raises(PoleError, match=r"term 0 \(x\^-1.5\)"):
        frac_deriv_series(s, 1.5, 2.0)


def test_series_caputo_kind_from_string():
    s = FracSeries.from_terms([(4, 0), (1, 2)])
    assert frac_deriv_series(s, 0.5, 1, "caputo") == pytest.approx(math.gamma(3) / math.gamma(2.5))


_terms = st.lists(st.tuples(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                            st.sampled_from([-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.25])),
                  max_size=6)


@given(_terms, _terms, st.sampled_from([-1.5, -0.4, 0.3, 0.87, 1.2, 1.9]),
       st.sampled_from([0.5, 1.3, -2.0, 1 + 1j]))
@settings(max_examples=200, deadline=None)
def test_series_linearity(a, b, alpha, x):
    sa, sb = FracSeries.from_terms(a), FracSeries.from_terms(b)
    whole = frac_deriv_series(sa + sb, alpha, x)
    parts = frac_deriv_series(sa, alpha, x) + frac_deriv_series(sb, alpha, x)
    scale = sum(abs(frac_deriv_series(FracSeries.from_terms([t]), alpha, x)) for t in a + b)
    assert abs(whole - parts) <= 1e-13 * max(1.0, scale)


@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(0, 12)), max_size=8))
def test_series_terms_sorted_and_merged(terms):
    s = FracSeries.from_terms(terms)
    mus = [mu for _, mu in s.terms]
    assert mus == sorted(set(mus))
    assert all(c != 0 for c, _ in s.terms)


# ---------------------------------------------------------------- identities

@pytest.mark.parametrize("mu", [0, 1, 2, 3])
@pytest.mark.parametrize("x", [0.5, 1, 2])
@pytest.mark.parametrize("a, b", [(-0.3, -0.6), (-0.5, -0.5), (-1.2, -0.7), (-0.25, -1.5)])
def test_semigroup_of_integrals(mu, x, a, b):
    first = rl_term(1, mu, a, 1.0)           # coefficient of x^(mu - a)
    twice = rl_term(first, mu - a, b, x)
    once = rl_term(1, mu, a + b, x)
    assert abs(twice - once) <= 1e-10 * abs(once)


@given(st.floats(-0.95, 4), st.floats(0.05, 1.95), st.floats(0.1, 3))
@settings(max_examples=300, deadline=None)
def test_derivative_left_inverse_of_integral(mu, alpha, x):
    coeff = rl_term(1, mu, -alpha, 1.0)
    back = rl_term(coeff, mu + alpha, alpha, x)
    assert abs(back - x ** mu) <= 1e-10 * x ** mu


# ---------------------------------------------------------------- jacobian

def test_frac_jacobian_examples():
    f = parse("x^2 - 1", 1)
    expected = math.gamma(3) / math.gamma(2.5) - 1 / math.gamma(0.5)
    assert frac_jacobian(f, 0.5, [1])[0][0] == pytest.approx(expected, rel=1e-13)
    g = parse(POLY2D, 2)
    assert frac_jacobian(g, 1, [1, 1]) == [[2, 3], [3, -2]]
    assert abs(frac_jacobian(f, 1 - 1e-6, [2])[0][0] - 4) <= 1e-4


def test_frac_jacobian_singular_point():
    with pytest.raises(SingularPointError):
        frac_jacobian(parse(POLY2D, 2), 0.5, [1, 0])
    # classic order needs no series
    assert frac_jacobian(parse(POLY2D, 2), 1, [1, 0]) == [[2, 0], [3, 0]]


def test_frac_jacobian_warns_far_from_origin():
    f = parse(SINE, 1)
    with pytest.warns(SeriesAccuracyWarning):
        frac_jacobian(f, 0.5, [12.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        frac_jacobian(parse("x^2", 1), 0.5, [12.0])


def test_frac_jacobian_sine_matches_oracle_integral():
    # RL derivative of sin(x) from the lower limit 0, via numerical quadrature
    mpmath.mp.dps = 30
    alpha, x = 0.5, 1.3
    # D^a f = d/dx I^(1-a) f
    def integral(t):
        return mpmath.quad(lambda s: mpmath.sin(s) * (t - s) ** (-alpha), [0, t]) / mpmath.gamma(1 - alpha)
    oracle = mpmath.diff(integral, x)
    f = parse("sin(x)", 1)
    assert abs(frac_jacobian(f, alpha, [x])[0][0] - complex(oracle)) <= 1e-10


def _random_poly_system(rng, n):
    comps = []
    for _ in range(n):
        terms = []
        for _ in range(rng.randint(1, 4)):
            c = round(rng.uniform(-5, 5), 2)
            powers = "*".join(f"x{j}^{rng.randint(0, 4)}" for j in range(1, n + 1))
            terms.append(f"({c})*{powers}")
        comps.append(" + ".join(terms) + f" + ({round(rng.uniform(-5, 5), 2)})")
    return parse(comps, n)


def test_continuity_at_order_one():
    # The first-order sensitivity of each entry to the order is
    # |J| * |digamma(mu) - log x| * 1e-6, so the bound is absolute for
    # entries up to 1 in size and relative above that.
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randint(1, 3)
        f = _random_poly_system(rng, n)
        x = [rng.choice((-1, 1)) * rng.uniform(0.5, 2) for _ in range(n)]
        classic = f.jacobian(x)
        for alpha in (1 - 1e-6, 1 + 1e-6):
            jac = frac_jacobian(f, alpha, x)
            for ra, rb in zip(jac, classic):
                for a, b in zip(ra, rb):
                    assert abs(a - b) <= 1e-3 * max(1.0, abs(b))
