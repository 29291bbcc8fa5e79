"""Test function families with declared smoothness and Fourier data.

All members use the convention Ff(u) = int f(x) exp(i<u, x>) dx. One
dimensional families take plain arrays; multi-dimensional functions are
tensor products and take arrays with a trailing coordinate axis.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .errors import CapabilityError, ConfigError

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SmoothnessClass:
    """Declared regularity: Sobolev exponent bound and locality flavour."""

    sobolev_s: float                     # strict upper bound, inf for smooth
    locality: str = "global"             # global | local | fourier_lebesgue


@dataclass(frozen=True)
class TestFunction:
    __test__ = False        # not a pytest test class despite the name

    name: str
    value: Callable
    gradient: Callable | None = None
    fourier: Callable | None = None
    smoothness: SmoothnessClass = SmoothnessClass(math.inf)
    support_radius: float | None = None
    osc_scale: float = 1.0               # node density hint for u-quadrature
    dimension: int = 1
    complex_valued: bool = False
    integrable: bool = True              # admits a (numerical) Fourier transform
    gaussian_expectation: Callable | None = None  # (mu, var) -> E[f(N(mu, var))]
    components: tuple | None = None      # tensor product factors

    def __repr__(self):  # avoid dumping callables
        return f"TestFunction({self.name!r}, d={self.dimension})"


def fn_value(f: TestFunction, x: np.ndarray) -> np.ndarray:
    """Evaluate f on points of shape (..., d)."""
    x = np.asarray(x)
    if f.dimension == 1 and x.shape[-1] == 1:
        return f.value(x[..., 0])
    return f.value(x)


def fn_gradient(f: TestFunction, x: np.ndarray) -> np.ndarray:
    """Gradient on points of shape (..., d), returned with a coordinate axis."""
    if f.gradient is None:
        raise CapabilityError(f"{f.name} has no gradient")
    x = np.asarray(x)
    if f.dimension == 1 and x.shape[-1] == 1:
        return np.asarray(f.gradient(x[..., 0]))[..., None]
    return f.gradient(x)


def eval_on_path(f: TestFunction, bundle, which: str = "fine",
                 gradient: bool = False):
    """Sample f (and optionally its gradient) along bundle trajectories.

    The process's independent shift, when present, is applied: values are
    f(X_t + xi). Returns an array of shape (paths, nodes) or a pair with the
    gradient array (paths, nodes, d).
    """
    if which == "fine":
        x = bundle.x
    elif which == "coarse":
        x = bundle.coarse_x()
    else:
        raise ConfigError(f"unknown node set {which!r}")
    y = x + bundle.shifts[:, None, :]
    vals = fn_value(f, y)
    if not gradient:
        return vals
    return vals, fn_gradient(f, y)


# ---------------------------------------------------------------------------
# registered one-dimensional families


def gaussian_bump() -> TestFunction:
    """f(x) = exp(-x^2 / 2), a smooth rapidly decaying reference function."""
    return TestFunction(
        name="gaussian_bump",
        value=lambda x: np.exp(-0.5 * np.asarray(x, float) ** 2),
        gradient=lambda x: -np.asarray(x, float) * np.exp(-0.5 * np.asarray(x, float) ** 2),
        fourier=lambda u: SQRT_2PI * np.exp(-0.5 * np.asarray(u, float) ** 2),
        smoothness=SmoothnessClass(math.inf),
        support_radius=8.0,
        osc_scale=1.0,
    )


def hat() -> TestFunction:
    """Piecewise linear hat max(0, 1 - |x|); gradient one-sided at the kinks."""
    def value(x):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(x, float)))

    def grad(x):
        x = np.asarray(x, float)
        # right-limit convention at the kink set {-1, 0, 1}
        return np.where((x >= -1.0) & (x < 0.0), 1.0,
                        np.where((x >= 0.0) & (x < 1.0), -1.0, 0.0))

    def fourier(u):
        u = np.asarray(u, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 2.0 * (1.0 - np.cos(u)) / u ** 2
        return np.where(np.abs(u) < 1e-8, 1.0 - u ** 2 / 12.0, out)

    return TestFunction("hat", value, grad, fourier,
                        SmoothnessClass(1.5), support_radius=1.0, osc_scale=2.0)


def indicator(a: float, b: float) -> TestFunction:
    """Indicator of [a, b]; no gradient; H^s only for s < 1/2."""
    if not b > a:
        raise ConfigError(f"indicator needs a < b, got [{a}, {b}]")

    def value(x):
        x = np.asarray(x, float)
        return ((x >= a) & (x <= b)).astype(float)

    def fourier(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (np.exp(1j * u * b) - np.exp(1j * u * a)) / (1j * u)
        small = np.abs(u) < 1e-12
        return np.where(small, b - a, out)

    def gauss_expect(mu, var):
        sd = np.sqrt(np.maximum(var, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            hi = np.where(sd > 0, (b - mu) / np.where(sd > 0, sd, 1.0), 0.0)
            lo = np.where(sd > 0, (a - mu) / np.where(sd > 0, sd, 1.0), 0.0)
        point = ((mu >= a) & (mu <= b)).astype(float)
        return np.where(sd > 0, ndtr(hi) - ndtr(lo), point)

    scale = max(abs(a), abs(b), b - a)
    return TestFunction(f"indicator({a},{b})", value, None, fourier,
                        SmoothnessClass(0.5), support_radius=max(abs(a), abs(b)),
                        osc_scale=max(scale, 1.0),
                        gaussian_expectation=gauss_expect)


def power_singularity(alpha: float, cutoff: float = 1.0) -> TestFunction:
    """|x|^(-alpha) localized by a smooth bump of width ``cutoff``."""
    if not 0 < alpha < 1:
        raise ConfigError("power singularity needs 0 < alpha < 1 in d = 1")

    def value(x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore"):
            out = np.abs(x) ** (-alpha) * np.exp(-0.5 * (x / cutoff) ** 2)
        return np.where(x == 0.0, 0.0, out)

    return TestFunction(f"power_singularity({alpha})", value, None, None,
                        SmoothnessClass(0.5 - alpha, "local"),
                        support_radius=8.0 * cutoff, osc_scale=1.0)


def lacunary(s: float, J: int = 12, cutoff: float = 3.0) -> TestFunction:
    """Localized lacunary cosine series with tunable Sobolev smoothness.

    f(x) = w(x) * sum_j 2^(-j s) cos(2^j x) with a Gaussian localizer w of
    width ``cutoff``; the dyadic coefficient decay places the H^sigma
    membership boundary at sigma = s.
    """
    if J < 1:
        raise ConfigError("lacunary series needs J >= 1")
    js = np.arange(1, J + 1)
    freqs = 2.0 ** js
    coeffs = 2.0 ** (-js * s)
    c2 = cutoff ** 2

    def w(x):
        return np.exp(-0.5 * x ** 2 / c2)

    # term-by-term accumulation keeps memory at O(len(x)) even on large
    # path ensembles
    def value(x):
        x = np.asarray(x, float)
        series = np.zeros_like(x)
        for fj, cj in zip(freqs, coeffs):
            series += cj * np.cos(fj * x)
        return w(x) * series

    def grad(x):
        x = np.asarray(x, float)
        series = np.zeros_like(x)
        dseries = np.zeros_like(x)
        for fj, cj in zip(freqs, coeffs):
            series += cj * np.cos(fj * x)
            dseries -= cj * fj * np.sin(fj * x)
        return w(x) * (dseries - x / c2 * series)

    def fourier(u):
        u = np.asarray(u, float)
        fw = lambda v: cutoff * SQRT_2PI * np.exp(-0.5 * c2 * v ** 2)
        shifted = 0.5 * (fw(np.subtract.outer(u, freqs)) + fw(np.add.outer(u, freqs)))
        return np.tensordot(shifted, coeffs, axes=(-1, 0))

    return TestFunction(f"lacunary(s={s},J={J})", value, grad, fourier,
                        SmoothnessClass(s), support_radius=8.0 * cutoff,
                        osc_scale=4.0 * cutoff)


def complex_exponential(u: float) -> TestFunction:
    """f(x) = exp(i u x), the diagnostic frequency probe."""
    u = float(u)

    def value(x):
        return np.exp(1j * u * np.asarray(x, float))

    return TestFunction(f"complex_exponential({u})", value,
                        gradient=lambda x: 1j * u * np.exp(1j * u * np.asarray(x, float)),
                        fourier=None, smoothness=SmoothnessClass(math.inf),
                        complex_valued=True, integrable=False)


def identity() -> TestFunction:
    return TestFunction("identity", lambda x: np.asarray(x, float) + 0.0,
                        gradient=lambda x: np.ones_like(np.asarray(x, float)),
                        smoothness=SmoothnessClass(math.inf, "local"),
                        integrable=False)


def quadratic() -> TestFunction:
    return TestFunction("quadratic", lambda x: np.asarray(x, float) ** 2,
                        gradient=lambda x: 2.0 * np.asarray(x, float),
                        smoothness=SmoothnessClass(math.inf, "local"),
                        integrable=False)


def constant(c: float = 1.0) -> TestFunction:
    c = float(c)
    return TestFunction(f"constant({c})",
                        lambda x: np.full(np.shape(np.asarray(x)), c),
                        gradient=lambda x: np.zeros_like(np.asarray(x, float)),
                        smoothness=SmoothnessClass(math.inf, "local"),
                        integrable=False)


def tensor_product(factors) -> TestFunction:
    """d >= 2 function as a product of one-dimensional members."""
    factors = tuple(factors)
    if len(factors) < 2:
        raise ConfigError("tensor product needs at least two factors")
    if any(f.dimension != 1 for f in factors):
        raise ConfigError("tensor factors must be one-dimensional")
    d = len(factors)

    def value(x):
        x = np.asarray(x)
        out = factors[0].value(x[..., 0])
        for i in range(1, d):
            out = out * factors[i].value(x[..., i])
        return out

    has_grad = all(f.gradient is not None for f in factors)

    def grad(x):
        x = np.asarray(x, float)
        vals = [f.value(x[..., i]) for i, f in enumerate(factors)]
        out = np.empty(x.shape)
        for i, f in enumerate(factors):
            g = f.gradient(x[..., i])
            others = np.ones_like(g)
            for j, v in enumerate(vals):
                if j != i:
                    others = others * v
            out[..., i] = g * others
        return out

    has_fourier = all(f.fourier is not None for f in factors)

    def fourier(u):
        u = np.asarray(u, float)
        out = factors[0].fourier(u[..., 0])
        for i in range(1, d):
            out = out * factors[i].fourier(u[..., i])
        return out

    s = min(f.smoothness.sobolev_s for f in factors)
    radii = [f.support_radius for f in factors]
    radius = None if any(r is None for r in radii) else max(radii)
    return TestFunction(
        "tensor(" + ",".join(f.name for f in factors) + ")",
        value, grad if has_grad else None, fourier if has_fourier else None,
        SmoothnessClass(s), support_radius=radius,
        osc_scale=max(f.osc_scale for f in factors), dimension=d,
        integrable=all(f.integrable for f in factors),
        components=factors)


# ---------------------------------------------------------------------------
# config-file parsing of function descriptors


_FAMILY_BUILDERS = {
    "gaussian_bump": (gaussian_bump, ()),
    "hat": (hat, ()),
    "indicator": (indicator, ("a", "b")),
    "power_singularity": (power_singularity, ("alpha", "cutoff")),
    "lacunary": (lacunary, ("s", "J", "cutoff")),
    "complex_exponential": (complex_exponential, ("u",)),
    "identity": (identity, ()),
    "quadratic": (quadratic, ()),
    "constant": (constant, ("c",)),
}

_CALL_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_function(text: str) -> TestFunction:
    """Parse descriptors like ``gaussian_bump`` or ``lacunary(s=1.2, J=12)``."""
    m = _CALL_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse function descriptor {text!r}")
    name, argtext = m.group(1), m.group(2)
    if name not in _FAMILY_BUILDERS:
        known = ", ".join(sorted(_FAMILY_BUILDERS))
        raise ConfigError(f"unknown function family {name!r}; known: {known}")
    builder, param_names = _FAMILY_BUILDERS[name]
    args, kwargs = [], {}
    if argtext and argtext.strip():
        for piece in argtext.split(","):
            piece = piece.strip()
            if "=" in piece:
                key, val = (p.strip() for p in piece.split("=", 1))
                if key not in param_names:
                    raise ConfigError(
                        f"unknown parameter {key!r} for {name}; expected {param_names}")
                kwargs[key] = _number(val)
            else:
                args.append(_number(piece))
    try:
        fn = builder(*args, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad arguments for {name}: {exc}") from exc
    return fn


def _number(text: str):
    v = float(text)
    return int(v) if v == int(v) and "." not in text and "e" not in text.lower() else v
