import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from occutime import (
    ConfigError,
    complex_exponential,
    constant,
    gaussian_bump,
    hat,
    identity,
    indicator,
    lacunary,
    parse_function,
    power_singularity,
    quadratic,
    tensor_product,
)

SMOOTH_FAMILIES = [gaussian_bump, lambda: lacunary(1.2, J=6), identity,
                   quadratic, lambda: constant(2.5)]


@pytest.mark.parametrize("factory", SMOOTH_FAMILIES)
def test_gradient_matches_finite_differences(factory):
    f = factory()
    x = np.linspace(-2.5, 2.5, 41)
    h = 1e-6
    numeric = (f.value(x + h) - f.value(x - h)) / (2 * h)
    np.testing.assert_allclose(f.gradient(x), numeric, atol=1e-4, rtol=1e-4)


@given(st.floats(-30.0, 30.0))
@settings(max_examples=50, deadline=None)
def test_gaussian_bump_fourier_closed_form(u):
    f = gaussian_bump()
    # int e^{-x^2/2} e^{iux} dx = sqrt(2 pi) e^{-u^2/2}
    expected = math.sqrt(2 * math.pi) * math.exp(-0.5 * u * u)
    assert f.fourier(u) == pytest.approx(expected, rel=1e-12)


def test_fourier_conventions_numerically():
    # validate the registered transforms against direct quadrature of
    # int f(x) e^{iux} dx on a dense grid
    x = np.linspace(-40, 40, 400001)
    dx = x[1] - x[0]
    for f in (gaussian_bump(), hat(), indicator(-0.3, 1.1), lacunary(1.0, J=4)):
        for u in (0.0, 0.7, 3.0):
            direct = np.sum(f.value(x) * np.exp(1j * u * x)) * dx
            # the Riemann sum resolves discontinuous integrands only to O(dx)
            assert f.fourier(u) == pytest.approx(direct, abs=3e-4)


def test_indicator_gaussian_expectation_oracle():
    f = indicator(0.0, 1.0)
    rng = np.random.default_rng(0)
    mu, var = 0.3, 0.49
    samples = mu + math.sqrt(var) * rng.standard_normal(200000)
    mc = f.value(samples).mean()
    exact = f.gaussian_expectation(np.array(mu), np.array(var))
    assert float(exact) == pytest.approx(mc, abs=0.005)
    # degenerate variance reduces to a point evaluation
    assert float(f.gaussian_expectation(np.array(0.5), np.array(0.0))) == 1.0
    assert float(f.gaussian_expectation(np.array(2.0), np.array(0.0))) == 0.0


def test_indicator_requires_ordered_endpoints():
    with pytest.raises(ConfigError):
        indicator(1.0, 1.0)


def test_power_singularity_blows_up_near_zero():
    f = power_singularity(0.4)
    small, smaller = f.value(np.array([0.01])), f.value(np.array([0.001]))
    assert smaller > small > 1.0
    assert f.value(np.array([0.0])) == 0.0
    with pytest.raises(ConfigError):
        power_singularity(1.5)


def test_complex_exponential_is_unimodular():
    f = complex_exponential(2.0)
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(np.abs(f.value(x)), 1.0)
    np.testing.assert_allclose(f.gradient(x), 2j * f.value(x))


def test_tensor_product_value_and_gradient():
    f = tensor_product([gaussian_bump(), identity()])
    pts = np.array([[0.5, 2.0], [-1.0, 3.0]])
    expected = np.exp(-0.5 * pts[:, 0] ** 2) * pts[:, 1]
    np.testing.assert_allclose(f.value(pts), expected)
    g = f.gradient(pts)
    np.testing.assert_allclose(
        g[:, 0], -pts[:, 0] * np.exp(-0.5 * pts[:, 0] ** 2) * pts[:, 1])
    np.testing.assert_allclose(g[:, 1], np.exp(-0.5 * pts[:, 0] ** 2))
    assert f.dimension == 2


def test_parse_function_round_trips():
    assert parse_function("gaussian_bump").name == "gaussian_bump"
    f = parse_function("lacunary(s=1.2, J=6)")
    assert f.name == "lacunary(s=1.2,J=6)"
    assert parse_function("indicator(a=0, b=1)").name == "indicator(0,1)"
    assert parse_function("constant(c=3)").value(np.zeros(2))[0] == 3.0


@pytest.mark.parametrize("text", ["nope", "gaussian_bump(oops=1)",
                                  "indicator(a=1, b=0)", "lacunary(J=0)",
                                  "indicator(z=3)"])
def test_parse_function_rejects_bad_descriptors(text):
    with pytest.raises(ConfigError):
        parse_function(text)
