import pytest

from fracroot.expr import parse

POLY16 = ("-57.62*x^16 - 56.69*x^15 - 37.39*x^14 - 19.91*x^13 + 35.83*x^12 - 72.47*x^11"
          " + 44.41*x^10 + 43.53*x^9 + 59.93*x^8 - 42.9*x^7 - 54.24*x^6 + 72.12*x^5"
          " - 22.92*x^4 + 56.39*x^3 + 15.8*x^2 + 60.05*x + 55.31")
SINE = "sin(x) - 3/(2*x)"
POLY2D = "x1^2 + x2^3 - 10; x1^3 - x2^2 - 1"
SYS3D = "x1^2 + x2 - 37; x1 - x2^2 - 5; x1 + x2 + x3 - 3"
TRIG2D = ("0.5*sin(x1*x2) - x2/(4*pi) - x1/2;"
          " (1 - 1/(4*pi))*(exp(2*x1) - e) + e/pi*x2 - 2*e*x1")
HYPER3D = ("-3.6*x3*(x1^3*x2 + 1) - 3.6*cos(x2^2) + 10.8;"
           " -1.6*x1*(x1 + x2^3*x3) - 1.6*sinh(x3) + 6.4;"
           " -4*x2*(x1*x3^3 + 1) - 4*cosh(x1) + 24")


@pytest.fixture(scope="session")
def poly16():
    return parse(POLY16, 1)


@pytest.fixture(scope="session")
def sine():
    return parse(SINE, 1)


@pytest.fixture(scope="session")
def poly2d():
    return parse(POLY2D, 2)


@pytest.fixture(scope="session")
def sys3d():
    return parse(SYS3D, 3)


@pytest.fixture(scope="session")
def trig2d():
    return parse(TRIG2D, 2)


@pytest.fixture(scope="session")
def hyper3d():
    return parse(HYPER3D, 3)
