import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from occutime import (
    BrownianMotion,
    CapabilityError,
    ConfigError,
    FixedStart,
    StochVol,
    bridge_conditional_estimate,
    bridge_conditional_mean,
    build_grid,
    gaussian_bump,
    identity,
    indicator,
    quadratic,
    reference_value,
    riemann_estimate,
    simulate_paths,
    tensor_product,
    trapezoid_estimate,
)
from occutime.functions import eval_on_path


@given(st.integers(2, 40), st.integers(0, 10 ** 6))
@settings(max_examples=60, deadline=None)
def test_trapezoid_is_riemann_plus_boundary_correction(n, seed):
    grid = build_grid(1.5, n, 1)
    vals = np.random.default_rng(seed).standard_normal((3, n + 1))
    correction = 0.5 * grid.coarse_step * (vals[:, -1] - vals[:, 0])
    np.testing.assert_allclose(trapezoid_estimate(vals, grid),
                               riemann_estimate(vals, grid) + correction,
                               rtol=1e-12, atol=1e-14)


def test_estimators_at_intermediate_time():
    grid = build_grid(1.0, 4, 2)
    vals = np.arange(5.0)
    assert riemann_estimate(vals, grid, t=0.5) == pytest.approx(0.25 * (0 + 1))
    assert trapezoid_estimate(vals, grid, t=0.5) == pytest.approx(
        0.25 * (0.5 * 0 + 1 + 0.5 * 2))
    assert riemann_estimate(vals, grid, t=0.1) == 0.0


def test_reference_value_is_fine_trapezoid():
    grid = build_grid(1.0, 2, 4)
    vals = grid.fine_times ** 2
    assert reference_value(vals, grid) == pytest.approx(
        np.trapezoid(vals, dx=grid.fine_step))
    with pytest.raises(ConfigError):
        reference_value(vals, build_grid(1.0, 2, 1))


def test_bridge_mean_interpolates():
    assert bridge_conditional_mean(1.0, 3.0, 0.25) == pytest.approx(1.5)
    with pytest.raises(ConfigError):
        bridge_conditional_mean(0.0, 1.0, 1.5)


def test_bridge_equals_trapezoid_for_identity():
    grid = build_grid(1.0, 16, 1)
    bundle = simulate_paths(BrownianMotion(), grid, 100, master_seed=21)
    coarse = bundle.coarse_x()[:, :, 0]
    bridge = bridge_conditional_estimate(identity(), coarse, grid)
    trap = trapezoid_estimate(coarse, grid)
    np.testing.assert_allclose(bridge, trap, atol=1e-12)


def test_bridge_quadratic_single_interval():
    # one interval from 0 to 0 on [0, 1]: E int_0^1 B_tau^2 dtau with a
    # standard bridge B equals int tau (1 - tau) dtau = 1/6
    grid = build_grid(1.0, 1, 1)
    coarse = np.zeros((1, 2))
    val = bridge_conditional_estimate(quadratic(), coarse, grid)
    assert val[0] == pytest.approx(1.0 / 6.0, rel=1e-10)


def test_bridge_indicator_against_monte_carlo():
    grid = build_grid(1.0, 4, 1)
    f = indicator(0.0, 0.5)
    coarse = np.array([[0.0, 0.3, -0.2, 0.6, 0.1]])
    estimate = bridge_conditional_estimate(f, coarse, grid)[0]

    rng = np.random.default_rng(5)
    total = 0.0
    reps = 40000
    m_sub = 64
    taus = (np.arange(m_sub) + 0.5) / m_sub
    for k in range(4):
        a, b = coarse[0, k], coarse[0, k + 1]
        mean = a + taus * (b - a)
        sd = np.sqrt(taus * (1 - taus) * grid.coarse_step)
        pts = mean + sd * rng.standard_normal((reps, m_sub))
        total += grid.coarse_step * f.value(pts).mean()
    assert estimate == pytest.approx(total, abs=0.003)


def test_bridge_rejects_non_brownian_spec():
    grid = build_grid(1.0, 4, 1)
    with pytest.raises(CapabilityError):
        bridge_conditional_estimate(identity(), np.zeros((1, 5)), grid,
                                    spec=StochVol())


def test_bridge_tensor_product_factorizes():
    grid = build_grid(1.0, 8, 1)
    spec = BrownianMotion(dimension=2, initial=FixedStart((0.0, 0.0)))
    bundle = simulate_paths(spec, grid, 50, master_seed=3)
    f2 = tensor_product([gaussian_bump(), gaussian_bump()])
    joint = bridge_conditional_estimate(f2, bundle.coarse_x(), grid)
    assert joint.shape == (50,)
    assert np.all(joint >= 0) and np.all(joint <= 1.0)


def test_common_paths_error_ordering():
    # optimal conditional estimator cannot beat trapezoid by definition of
    # the L2 projection, and trapezoid beats Riemann for smooth f
    grid = build_grid(1.0, 32, 64)
    bundle = simulate_paths(BrownianMotion(), grid, 400, master_seed=17)
    f = gaussian_bump()
    fine = eval_on_path(f, bundle)
    ref = reference_value(fine, grid)
    coarse = fine[:, ::grid.refine_factor]
    rms = lambda e: np.sqrt(np.mean(e ** 2))
    err_riem = rms(ref - riemann_estimate(coarse, grid))
    err_trap = rms(ref - trapezoid_estimate(coarse, grid))
    err_bridge = rms(ref - bridge_conditional_estimate(
        f, bundle.coarse_x()[:, :, 0], grid))
    assert err_bridge <= err_trap * 1.02
    assert err_trap < err_riem
