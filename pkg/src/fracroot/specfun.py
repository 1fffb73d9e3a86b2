"""Gamma function and principal-branch complex powers.

Real arguments stay on the float path (``math``); anything with a complex
type goes through ``cmath``.  Both share the same Lanczos sum.
"""

from __future__ import annotations

import cmath
import math
from numbers import Complex, Real

from .errors import DomainError, PoleError

__all__ = ["gamma", "rgamma", "principal_pow", "sinpi", "cospi", "POLE_TOL"]

POLE_TOL = 1e-12

# Lanczos approximation, g = 7, n = 9.
_G = 7.0
_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _check_finite(z) -> None:
    if isinstance(z, complex):
        ok = math.isfinite(z.real) and math.isfinite(z.imag)
    else:
        ok = math.isfinite(z)
    if not ok:
        raise DomainError(f"non-finite argument {z!r}")


def sinpi(x: float) -> float:
    """sin(pi*x) for real x, exact at integers and half-integers."""
    r = x - 2.0 * round(x / 2.0)  # r in [-1, 1], exact in binary
    if r == 0.0 or abs(r) == 1.0:
        return 0.0
    if r == 0.5:
        return 1.0
    if r == -0.5:
        return -1.0
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def cospi(x: float) -> float:
    return sinpi(x + 0.5)


def _csinpi(z: complex) -> complex:
    shift = 2.0 * round(z.real / 2.0)
    return cmath.sin(math.pi * (z - shift))


def _near_pole(z) -> bool:
    re = z.real
    if re > 0.5:
        return False
    return abs(z - round(re)) < POLE_TOL


def _lanczos_real(x: float) -> float:
    # valid for x >= 0.5
    x -= 1.0
    acc = _COEF[0]
    for i in range(1, len(_COEF)):
        acc += _COEF[i] / (x + i)
    t = x + _G + 0.5
    half = math.pow(t, (x + 0.5) / 2.0)
    return _SQRT_2PI * half * (half * math.exp(-t)) * acc


def _lanczos_complex(z: complex) -> complex:
    z -= 1.0
    acc = complex(_COEF[0])
    for i in range(1, len(_COEF)):
        acc += _COEF[i] / (z + i)
    t = z + _G + 0.5
    return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * acc


def gamma(z):
    """Gamma function for real or complex ``z``.

    Real input returns a float, complex input a complex.  Uses the
    reflection formula for ``Re z < 0.5``.

    Raises PoleError within ``POLE_TOL`` of a non-positive integer and
    OverflowError when the result is not representable.
    """
    _check_finite(z)
    if _near_pole(z):
        raise PoleError(f"gamma pole at {z!r}")
    if isinstance(z, complex):
        try:
            if z.real < 0.5:
                val = math.pi / (_csinpi(z) * _lanczos_complex(1.0 - z))
            else:
                val = _lanczos_complex(z)
        except OverflowError:
            raise OverflowError(f"gamma({z!r}) overflows") from None
        if not (math.isfinite(val.real) and math.isfinite(val.imag)):
            raise OverflowError(f"gamma({z!r}) overflows")
        return val
    x = float(z)
    if x == round(x) and 1.0 <= x <= 23.0:
        return float(math.factorial(int(x) - 1))
    try:
        if x < 0.5:
            val = math.pi / (sinpi(x) * _lanczos_real(1.0 - x))
        else:
            val = _lanczos_real(x)
    except OverflowError:
        raise OverflowError(f"gamma({x!r}) overflows") from None
    if not math.isfinite(val):
        raise OverflowError(f"gamma({x!r}) overflows")
    return val


def rgamma(z):
    """1/Gamma(z), with the entire-function value 0 at the poles."""
    _check_finite(z)
    if _near_pole(z):
        return 0.0
    return 1.0 / gamma(z)


def principal_pow(base, exponent: float) -> complex:
    """``exp(exponent * Log(base))`` on the principal branch, arg in (-pi, pi].

    Positive real bases give an exactly real result, and negative real bases
    use ``|base|**exponent * exp(i*pi*exponent)`` so that e.g. ``(-1)**0.5``
    is exactly ``1j``.
    """
    if type(exponent) is not float:
        if not isinstance(exponent, Real):
            raise TypeError("exponent must be real")
        exponent = float(exponent)
    if type(base) is complex:
        b = base
    elif isinstance(base, Complex):
        b = complex(base)
    else:
        raise TypeError("base must be a number")
    _check_finite(b)
    if b == 0:
        if exponent > 0:
            return 0j
        if exponent == 0:
            return 1 + 0j
        raise DomainError("0 raised to a negative power")
    if b.imag == 0.0:
        if b.real > 0:
            return complex(math.pow(b.real, exponent), 0.0)
        mag = math.pow(-b.real, exponent)
        return complex(mag * cospi(exponent), mag * sinpi(exponent))
    return cmath.exp(exponent * cmath.log(b))
