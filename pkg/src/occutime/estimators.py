"""Quadrature estimators of int_0^t f(X_r) dr from discrete observations.

All estimators consume only coarse-grid data; the fine-grid reference value
is the ground-truth surrogate. Time is the last sample axis, so every
function works on single paths and on ensembles alike.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import CapabilityError, ConfigError
from .functions import TestFunction
from .grids import TimeGrid
from .processes import BrownianMotion


def _check_samples(values: np.ndarray, needed: int, what: str) -> None:
    if values.shape[-1] < needed:
        raise ConfigError(
            f"{what}: need at least {needed} samples along the last axis, "
            f"got {values.shape[-1]}")


def riemann_estimate(coarse_values: np.ndarray, grid: TimeGrid,
                     t: float | None = None) -> np.ndarray:
    """Left-endpoint sum: step * sum of f(X_{t_{k-1}}) for k = 1..floor(t/step)."""
    t = grid.horizon if t is None else t
    coarse_values = np.asarray(coarse_values)
    k = grid.coarse_index(t)
    _check_samples(coarse_values, k + 1, "riemann_estimate")
    if k == 0:
        return np.zeros(coarse_values.shape[:-1])
    return grid.coarse_step * coarse_values[..., :k].sum(axis=-1)


def trapezoid_estimate(coarse_values: np.ndarray, grid: TimeGrid,
                       t: float | None = None) -> np.ndarray:
    """Average-of-endpoints sum; equals the Riemann sum plus the half-step
    boundary correction."""
    t = grid.horizon if t is None else t
    coarse_values = np.asarray(coarse_values)
    k = grid.coarse_index(t)
    _check_samples(coarse_values, k + 1, "trapezoid_estimate")
    if k == 0:
        return np.zeros(coarse_values.shape[:-1])
    inner = coarse_values[..., 1:k].sum(axis=-1)
    ends = 0.5 * (coarse_values[..., 0] + coarse_values[..., k])
    return grid.coarse_step * (inner + ends)


def reference_value(fine_values: np.ndarray, grid: TimeGrid,
                    t: float | None = None) -> np.ndarray:
    """Fine-grid trapezoidal sum, the ground-truth surrogate for the
    continuous-time integral."""
    if grid.refine_factor < 2:
        raise ConfigError("reference value needs fine refinement m >= 2")
    t = grid.horizon if t is None else t
    fine_values = np.asarray(fine_values)
    j = grid.fine_index(t)
    _check_samples(fine_values, j + 1, "reference_value")
    if j == 0:
        return np.zeros(fine_values.shape[:-1])
    return np.trapezoid(fine_values[..., :j + 1], dx=grid.fine_step, axis=-1)


def bridge_conditional_mean(x_prev, x_next, tau: float):
    """Conditional mean of the bridge at normalized intra-interval time tau."""
    if not 0.0 <= tau <= 1.0:
        raise ConfigError(f"normalized time must lie in [0, 1], got {tau}")
    x_prev = np.asarray(x_prev, float)
    x_next = np.asarray(x_next, float)
    return x_prev + tau * (x_next - x_prev)


@lru_cache(maxsize=8)
def _unit_gl(order: int):
    y, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (y + 1.0), 0.5 * w


@lru_cache(maxsize=8)
def _hermite(order: int):
    return np.polynomial.hermite.hermgauss(order)


def _bridge_expectation_1d(f: TestFunction, mean, var, q_x: int):
    """E[f(N(mean, var))] with var broadcast against mean."""
    if f.gaussian_expectation is not None:
        return f.gaussian_expectation(mean, np.broadcast_to(var, mean.shape))
    nodes, weights = _hermite(q_x)
    scale = np.sqrt(2.0 * var)
    points = mean[..., None] + scale[..., None] * nodes
    vals = f.value(points)
    return vals @ weights / np.sqrt(np.pi)


def bridge_conditional_estimate(f: TestFunction, coarse_x: np.ndarray,
                                grid: TimeGrid, t: float | None = None,
                                q_t: int = 8, q_x: int = 32,
                                spec=None) -> np.ndarray:
    """Conditional expectation estimator E[Gamma_t(f) | observations] for a
    Brownian X, realized by bridge quadrature.

    Per coarse interval the time integral uses Gauss-Legendre (q_t nodes); the
    space integral against the bridge marginal N(linear interpolation,
    tau (1 - tau) step) uses Gauss-Hermite (q_x nodes), or the function's
    closed-form Gaussian expectation when it has one (e.g. indicators).
    ``coarse_x`` holds raw observations X_{t_k}, time on the last axis for
    d = 1, or shape (..., n + 1, d) with a tensor-product f for d >= 2.
    """
    if spec is not None and not isinstance(spec, BrownianMotion):
        raise CapabilityError(
            "bridge conditional estimator requires a Brownian specification; "
            f"got {type(spec).__name__}")
    t = grid.horizon if t is None else t
    coarse_x = np.asarray(coarse_x, float)
    k = grid.coarse_index(t)
    tau, tw = _unit_gl(q_t)
    var = tau * (1.0 - tau) * grid.coarse_step

    def one_dim(x, fun):
        _check_samples(x, k + 1, "bridge_conditional_estimate")
        if k == 0:
            return np.zeros(x.shape[:-1])
        left = x[..., :k, None]
        right = x[..., 1:k + 1, None]
        mean = left + tau * (right - left)          # (..., k, q_t)
        expect = _bridge_expectation_1d(fun, mean, var, q_x)
        return grid.coarse_step * (expect @ tw).sum(axis=-1)

    if f.dimension == 1:
        return one_dim(coarse_x, f)

    if f.components is None:
        raise CapabilityError(
            "bridge estimator in d >= 2 needs a tensor-product function")
    if coarse_x.ndim < 2 or coarse_x.shape[-1] != f.dimension:
        raise ConfigError("coarse_x must have shape (..., n + 1, d)")
    # independent coordinates under the Brownian bridge: the conditional
    # expectation of the product factorizes per coordinate inside the
    # time quadrature
    _check_samples(np.moveaxis(coarse_x, -1, 0)[0], k + 1,
                   "bridge_conditional_estimate")
    if k == 0:
        return np.zeros(coarse_x.shape[:-2])
    prod = None
    for i, fun in enumerate(f.components):
        x = coarse_x[..., i]
        left = x[..., :k, None]
        right = x[..., 1:k + 1, None]
        mean = left + tau * (right - left)
        expect = _bridge_expectation_1d(fun, mean, var, q_x)
        prod = expect if prod is None else prod * expect
    return grid.coarse_step * (prod @ tw).sum(axis=-1)
