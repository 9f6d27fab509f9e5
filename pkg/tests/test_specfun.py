import math

import numpy as np
import pytest
from scipy import special

from nodal_lab import specfun


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5, 2.0, 3.7, 5.0, 10.0])
def test_bessel_j_matches_scipy(nu):
    x = np.linspace(0.0, 50.0, 2001)
    got = specfun.bessel_j(nu, x)
    assert np.max(np.abs(got - special.jv(nu, x))) < 1e-12


def test_bessel_half_order_closed_form():
    x = np.linspace(0.01, 40.0, 500)
    assert np.allclose(specfun.bessel_j(0.5, x), np.sqrt(2 / (np.pi * x)) * np.sin(x),
                       rtol=0, atol=1e-13)


def test_bessel_continuous_across_crossover():
    x = np.array([4.0 - 1e-9, 4.0, 4.0 + 1e-9])
    for nu in (0.0, 1.0, 2.5):
        assert np.max(np.abs(specfun.bessel_j(nu, x) - special.jv(nu, x))) < 1e-14


def test_bessel_scalar_and_origin():
    assert specfun.bessel_j(0.0, 0.0) == 1.0
    assert specfun.bessel_j(2.0, 0.0) == 0.0
    assert isinstance(specfun.bessel_j(1.0, 2.0), float)


def test_bessel_derivative_matches_scipy():
    x = np.linspace(0.1, 30.0, 300)
    for nu in (0.0, 1.0, 2.5):
        assert np.allclose(specfun.bessel_j_derivative(nu, x), special.jvp(nu, x), atol=1e-11)


def test_bessel_rejects_bad_input():
    with pytest.raises(ValueError):
        specfun.bessel_j(-1.0, 1.0)
    with pytest.raises(ValueError):
        specfun.bessel_j(0.0, -1.0)
    with pytest.raises(ValueError):
        specfun.bessel_j(float("nan"), 1.0)


def test_first_zeros():
    assert abs(specfun.bessel_first_zero(0) - 2.404825557695773) < 1e-12
    assert abs(specfun.bessel_first_zero(0.5) - math.pi) < 1e-12
    for nu in (1, 2, 3, 5, 10):
        assert abs(specfun.bessel_first_zero(nu) - special.jn_zeros(nu, 1)[0]) < 1e-10


def test_zero_lists():
    for nu in (0, 1, 4):
        assert np.allclose(specfun.bessel_zeros(nu, 8), special.jn_zeros(nu, 8), atol=1e-10)
    assert np.allclose(specfun.bessel_zeros(0.5, 5), math.pi * np.arange(1, 6), atol=1e-10)


def test_unit_ball_volume():
    assert specfun.unit_ball_volume(1) == pytest.approx(2.0)
    assert specfun.unit_ball_volume(2) == pytest.approx(math.pi)
    assert specfun.unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert specfun.unit_ball_volume(4) == pytest.approx(math.pi ** 2 / 2)
    with pytest.raises(ValueError):
        specfun.unit_ball_volume(0)


def test_gauss_legendre_exact_for_polynomials():
    rule = specfun.gauss_legendre(-1.0, 2.0, 6)
    for k in range(12):
        exact = (2.0 ** (k + 1) - (-1.0) ** (k + 1)) / (k + 1)
        assert rule(lambda x, k=k: x ** k) == pytest.approx(exact, rel=1e-13, abs=1e-13)


def test_adaptive_quad_smooth_and_singular():
    v, err = specfun.adaptive_quad(np.sin, 0.0, math.pi, tol=1e-12)
    assert abs(v - 2.0) < 1e-12 and err < 1e-10
    v, _ = specfun.adaptive_quad(np.sqrt, 0.0, 1.0, tol=1e-12, singular_left=True)
    assert abs(v - 2 / 3) < 1e-12
    v, _ = specfun.adaptive_quad(lambda x: x ** -0.5, 0.0, 1.0, tol=1e-10, singular_left=True)
    assert abs(v - 2.0) < 1e-9
    assert specfun.integrate(np.exp, 0.0, 1.0) == pytest.approx(math.e - 1, rel=1e-12)


def test_adaptive_quad_errors():
    with pytest.raises(ValueError):
        specfun.adaptive_quad(np.sin, 1.0, 1.0)
    with pytest.raises(specfun.QuadratureError):
        specfun.adaptive_quad(lambda x: np.sin(1 / x), 1e-8, 1.0, tol=1e-14, max_panels=4)
