import math

import numpy as np
import pytest

from occutime import (
    CapabilityError,
    ConfigError,
    TestFunction,
    fourier_lebesgue_seminorm,
    gaussian_bump,
    hat,
    indicator,
    lacunary,
    identity,
    sobolev_seminorm,
    tensor_product,
)
from occutime.functions import SmoothnessClass
from occutime.seminorms import inverse_fourier_value


def test_gaussian_bump_h1_closed_form():
    # |Ff|^2 |u|^2 integrates to 2 pi * sqrt(pi) / 2, so the seminorm is
    # pi^(3/4)
    r = sobolev_seminorm(gaussian_bump(), 1.0)
    assert not r.divergent
    assert r.value == pytest.approx(math.pi ** 0.75, abs=1e-6)


def test_gaussian_bump_fl0_closed_form():
    r = fourier_lebesgue_seminorm(gaussian_bump(), 0.0)
    assert r.value == pytest.approx(2.0 * math.pi, rel=1e-8)


def test_indicator_divergence_boundary():
    f = indicator(0.0, 1.0)
    finite = sobolev_seminorm(f, 0.3)
    assert not finite.divergent and np.isfinite(finite.value)
    divergent = sobolev_seminorm(f, 0.6)
    assert divergent.divergent
    assert divergent.value == math.inf


def test_lacunary_divergence_boundary():
    # coefficients 2^(-j s_t) put the H^s membership boundary at s = s_t
    f = lacunary(1.0, J=10)
    assert not sobolev_seminorm(f, 0.7).divergent
    assert sobolev_seminorm(f, 1.3).divergent


def test_scale_equivariance():
    f = gaussian_bump()
    g = TestFunction("scaled", lambda x: 3.0 * f.value(x),
                     fourier=lambda u: 3.0 * f.fourier(u),
                     smoothness=SmoothnessClass(math.inf))
    a = sobolev_seminorm(f, 1.0).value
    b = sobolev_seminorm(g, 1.0).value
    assert b == pytest.approx(3.0 * a, rel=1e-10)
    assert fourier_lebesgue_seminorm(g, 0.5).value == pytest.approx(
        3.0 * fourier_lebesgue_seminorm(f, 0.5).value, rel=1e-10)


def test_hat_h1_matches_derivative_energy():
    # |u Ff|^2 integrates to 2 pi int |f'|^2 dx = 4 pi (Plancherel without
    # the 1/(2 pi) normalization)
    r = sobolev_seminorm(hat(), 1.0)
    assert r.value == pytest.approx(math.sqrt(4.0 * math.pi), rel=1e-4)


def test_numeric_transform_fallback():
    # same function as gaussian_bump but with the closed form withheld
    f = TestFunction("bump_numeric", lambda x: np.exp(-0.5 * np.asarray(x) ** 2),
                     smoothness=SmoothnessClass(math.inf), support_radius=8.0)
    r = sobolev_seminorm(f, 1.0)
    assert r.value == pytest.approx(math.pi ** 0.75, rel=1e-4)


def test_non_integrable_without_transform_rejected():
    with pytest.raises(CapabilityError):
        sobolev_seminorm(identity(), 1.0)


def test_negative_order_rejected():
    with pytest.raises(ConfigError):
        sobolev_seminorm(gaussian_bump(), -0.5)


def test_tensor_product_seminorm_multiplies():
    f = gaussian_bump()
    t = tensor_product([f, f])
    single = sobolev_seminorm(f, 1.0).value
    assert sobolev_seminorm(t, 1.0).value == pytest.approx(single ** 2, rel=1e-8)


def test_inverse_transform_recovers_values():
    f = gaussian_bump()
    for x in (0.0, 0.8, -1.5):
        assert inverse_fourier_value(f, x) == pytest.approx(
            float(f.value(np.array(x))), abs=1e-6)
