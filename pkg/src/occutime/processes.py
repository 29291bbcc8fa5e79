"""Process specifications and fine-grid path simulation.

Three coefficient families are supported: standard Brownian motion,
Gaussian processes with deterministic time-dependent drift/diffusion
(sampled from the exact transition law), and a stochastic volatility
example driven by an auxiliary Brownian motion (Euler-Maruyama on the
fine grid). Per-path random streams are counter-based and derived from
``(master_seed, path_index)``, so ensembles are reproducible bit for bit
regardless of chunking or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CapabilityError, ConfigError, SimulationError
from .grids import TimeGrid

# Stream tags for the splittable per-path RNG. MAIN drives the initial value,
# the shift and the increments of W; VOL drives the auxiliary Brownian motion
# of the stochastic volatility; LIMIT is reserved for the limit-law module.
STREAM_MAIN = 0
STREAM_VOL = 1
STREAM_LIMIT = 2

GL16_NODES, GL16_WEIGHTS = np.polynomial.legendre.leggauss(16)


def path_rng(master_seed: int, path_index: int, stream: int = STREAM_MAIN) -> np.random.Generator:
    """Deterministic, non-overlapping per-path generator."""
    ss = np.random.SeedSequence(entropy=int(master_seed),
                                spawn_key=(int(path_index), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# initial laws and shifts


@dataclass(frozen=True)
class FixedStart:
    point: tuple[float, ...]

    def sample(self, rng: np.random.Generator, d: int) -> np.ndarray:
        return np.asarray(self.point, dtype=float).reshape(d)


@dataclass(frozen=True)
class UniformStart:
    low: tuple[float, ...]
    high: tuple[float, ...]

    def sample(self, rng: np.random.Generator, d: int) -> np.ndarray:
        return rng.uniform(np.asarray(self.low, float), np.asarray(self.high, float), size=d)


@dataclass(frozen=True)
class GaussianStart:
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def sample(self, rng: np.random.Generator, d: int) -> np.ndarray:
        return (np.asarray(self.mean, float)
                + np.asarray(self.std, float) * rng.standard_normal(d))


def fixed_start(*coords: float) -> FixedStart:
    return FixedStart(tuple(float(c) for c in coords))


@dataclass(frozen=True)
class UniformShift:
    """Independent shift with bounded density, uniform on [-w, w]^d."""

    half_width: float = 0.5

    def sample(self, rng: np.random.Generator, d: int) -> np.ndarray:
        return rng.uniform(-self.half_width, self.half_width, size=d)


# ---------------------------------------------------------------------------
# coefficient specifications


@dataclass(frozen=True)
class BrownianMotion:
    """X = X_0 + W: zero drift, identity diffusion."""

    dimension: int = 1
    initial: FixedStart | UniformStart | GaussianStart = field(
        default_factory=lambda: FixedStart((0.0,)))
    shift: UniformShift | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigError("dimension must be >= 1")


@dataclass(frozen=True)
class DeterministicGaussian:
    """Gaussian process with deterministic time-dependent coefficients.

    ``drift(t)`` returns a (d,) vector, ``diffusion(t)`` a (d, d) matrix.
    Optional ``drift_integral(t0, t1)`` / ``covariance_integral(t0, t1)``
    give closed forms for the transition moments; otherwise 16-point
    Gauss-Legendre per fine step is used. ``nondegenerate=False`` opts out
    of the eigenvalue check, allowing degenerate examples such as sigma = 0.
    """

    dimension: int
    drift: Callable[[float], np.ndarray]
    diffusion: Callable[[float], np.ndarray]
    initial: FixedStart | UniformStart | GaussianStart = field(
        default_factory=lambda: FixedStart((0.0,)))
    shift: UniformShift | None = None
    drift_integral: Callable[[float, float], np.ndarray] | None = None
    covariance_integral: Callable[[float, float], np.ndarray] | None = None
    nondegenerate: bool = True

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigError("dimension must be >= 1")

    def drift_at(self, t: float) -> np.ndarray:
        return np.asarray(self.drift(t), dtype=float).reshape(self.dimension)

    def diffusion_at(self, t: float) -> np.ndarray:
        return np.asarray(self.diffusion(t), dtype=float).reshape(
            self.dimension, self.dimension)

    def transition_moments(self, t0: float, t1: float) -> tuple[np.ndarray, np.ndarray]:
        """Mean and covariance of X_{t1} - X_{t0}."""
        if self.drift_integral is not None:
            mu = np.asarray(self.drift_integral(t0, t1), float).reshape(self.dimension)
        else:
            mu = _gl_integrate_vec(self.drift_at, t0, t1, self.dimension)
        if self.covariance_integral is not None:
            cov = np.asarray(self.covariance_integral(t0, t1), float).reshape(
                self.dimension, self.dimension)
        else:
            cov = _gl_integrate_mat(
                lambda t: self.diffusion_at(t) @ self.diffusion_at(t).T,
                t0, t1, self.dimension)
        return mu, cov


@dataclass(frozen=True)
class StochVol:
    """d = 1 stochastic volatility: sigma_t = sigma0 * (1 + eta * sin(W'_t))
    with an independent auxiliary Brownian motion W'. The volatility is an
    Ito semimartingale, so the declared modulus exponents are 1/2.
    """

    sigma0: float = 1.0
    eta: float = 0.5
    drift: Callable[[float, np.ndarray], np.ndarray] | None = None
    dimension: int = 1
    initial: FixedStart | UniformStart | GaussianStart = field(
        default_factory=lambda: FixedStart((0.0,)))
    shift: UniformShift | None = None
    alpha: float = 0.5
    beta: float = 0.5

    def __post_init__(self):
        if self.dimension != 1:
            raise ConfigError("StochVol is implemented for dimension 1 only")
        if not (0 < self.alpha <= 1 and 0 < self.beta <= 1):
            raise ConfigError("regularity exponents must lie in (0, 1]")


ProcessSpec = BrownianMotion | DeterministicGaussian | StochVol


def _gl_integrate_vec(fn, t0, t1, d):
    half = 0.5 * (t1 - t0)
    mid = 0.5 * (t1 + t0)
    out = np.zeros(d)
    for y, w in zip(GL16_NODES, GL16_WEIGHTS):
        out += w * np.asarray(fn(mid + half * y), float).reshape(d)
    return half * out


def _gl_integrate_mat(fn, t0, t1, d):
    half = 0.5 * (t1 - t0)
    mid = 0.5 * (t1 + t0)
    out = np.zeros((d, d))
    for y, w in zip(GL16_NODES, GL16_WEIGHTS):
        out += w * np.asarray(fn(mid + half * y), float).reshape(d, d)
    return half * out


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Square-root factor of a PSD matrix, tolerant of zero eigenvalues."""
    vals, vecs = np.linalg.eigh(cov)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


# ---------------------------------------------------------------------------
# path ensembles


@dataclass(frozen=True)
class PathBundle:
    """Ensemble of fine-grid trajectories with companion driving data.

    ``x`` and ``w`` have shape (paths, fine_count + 1, d). ``sigma`` is either
    (fine_count + 1, d, d), shared across paths for deterministic
    coefficients, or (paths, fine_count + 1) for the scalar stochastic
    volatility. ``drift_values`` follows the same convention.
    """

    grid: TimeGrid
    spec: ProcessSpec
    master_seed: int
    first_path_index: int
    x: np.ndarray
    w: np.ndarray | None
    sigma: np.ndarray | None
    drift_values: np.ndarray | None
    shifts: np.ndarray

    @property
    def count(self) -> int:
        return self.x.shape[0]

    @property
    def dimension(self) -> int:
        return self.x.shape[2]

    def path_indices(self) -> np.ndarray:
        return self.first_path_index + np.arange(self.count)

    def coarse_x(self) -> np.ndarray:
        """Observations at the coarse nodes, shape (paths, n + 1, d)."""
        return self.x[:, ::self.grid.refine_factor, :]

    def sigma_path(self, i: int) -> np.ndarray:
        """Diffusion values along path i, shape (fine_count + 1, d, d)."""
        if self.sigma is None:
            raise CapabilityError("bundle carries no diffusion companion data")
        if self.sigma.ndim == 3:
            return self.sigma
        return self.sigma[i][:, None, None]

    def drift_path(self, i: int) -> np.ndarray:
        if self.drift_values is None:
            raise CapabilityError("bundle carries no drift companion data")
        if self.drift_values.ndim == 2:
            return self.drift_values
        return self.drift_values[i]


def simulate_paths(spec: ProcessSpec, grid: TimeGrid, count: int,
                   master_seed: int, first_path_index: int = 0) -> PathBundle:
    """Simulate ``count`` trajectories on the fine grid.

    Brownian and deterministic-Gaussian variants use the exact Gaussian
    transition per fine step; the stochastic volatility variant uses
    Euler-Maruyama with the volatility frozen between fine nodes.
    """
    if count < 1:
        raise ConfigError(f"path count must be >= 1, got {count}")
    if isinstance(spec, BrownianMotion):
        return _simulate_brownian(spec, grid, count, master_seed, first_path_index)
    if isinstance(spec, DeterministicGaussian):
        return _simulate_deterministic(spec, grid, count, master_seed, first_path_index)
    if isinstance(spec, StochVol):
        return _simulate_stochvol(spec, grid, count, master_seed, first_path_index)
    raise ConfigError(f"unknown process spec {type(spec).__name__}")


def _draw_start_and_shift(spec, rng, d):
    x0 = spec.initial.sample(rng, d)
    shift = spec.shift.sample(rng, d) if spec.shift is not None else np.zeros(d)
    return x0, shift


def _simulate_brownian(spec, grid, count, master_seed, first_path_index):
    d = spec.dimension
    n_fine = grid.fine_count
    sqrt_dt = np.sqrt(grid.fine_step)
    x = np.empty((count, n_fine + 1, d))
    shifts = np.empty((count, d))
    for i in range(count):
        rng = path_rng(master_seed, first_path_index + i)
        x0, shifts[i] = _draw_start_and_shift(spec, rng, d)
        z = rng.standard_normal((n_fine, d))
        x[i, 0] = x0
        np.cumsum(z * sqrt_dt, axis=0, out=x[i, 1:])
        x[i, 1:] += x0
    w = x - x[:, :1, :]
    sigma = np.broadcast_to(np.eye(d), (n_fine + 1, d, d)).copy()
    drift = np.zeros((n_fine + 1, d))
    return PathBundle(grid, spec, master_seed, first_path_index,
                      x, w, sigma, drift, shifts)


def _simulate_deterministic(spec, grid, count, master_seed, first_path_index):
    d = spec.dimension
    n_fine = grid.fine_count
    times = grid.fine_times
    sqrt_dt = np.sqrt(grid.fine_step)

    sigma_nodes = np.empty((n_fine + 1, d, d))
    drift_nodes = np.empty((n_fine + 1, d))
    for j, t in enumerate(times):
        sigma_nodes[j] = spec.diffusion_at(t)
        drift_nodes[j] = spec.drift_at(t)
    if spec.nondegenerate:
        for j, t in enumerate(times):
            ssT = sigma_nodes[j] @ sigma_nodes[j].T
            lam = np.linalg.eigvalsh(ssT)[0]
            if lam <= 0:
                raise SimulationError(
                    f"diffusion matrix degenerate at time {t}: "
                    f"smallest eigenvalue of sigma sigma^T is {lam}")

    mu = np.empty((n_fine, d))
    factor = np.empty((n_fine, d, d))
    for j in range(n_fine):
        m, cov = spec.transition_moments(times[j], times[j + 1])
        mu[j] = m
        factor[j] = _psd_factor(cov)

    x = np.empty((count, n_fine + 1, d))
    w = np.empty((count, n_fine + 1, d))
    shifts = np.empty((count, d))
    for i in range(count):
        rng = path_rng(master_seed, first_path_index + i)
        x0, shifts[i] = _draw_start_and_shift(spec, rng, d)
        z = rng.standard_normal((n_fine, d))
        incr = mu + np.einsum("jab,jb->ja", factor, z)
        x[i, 0] = x0
        np.cumsum(incr, axis=0, out=x[i, 1:])
        x[i, 1:] += x0
        # W is the standardized innovation process driving the increments.
        w[i, 0] = 0.0
        np.cumsum(z * sqrt_dt, axis=0, out=w[i, 1:])
    return PathBundle(grid, spec, master_seed, first_path_index,
                      x, w, sigma_nodes, drift_nodes, shifts)


def _simulate_stochvol(spec, grid, count, master_seed, first_path_index):
    n_fine = grid.fine_count
    dt = grid.fine_step
    sqrt_dt = np.sqrt(dt)
    times = grid.fine_times

    x = np.empty((count, n_fine + 1, 1))
    w = np.empty((count, n_fine + 1, 1))
    sigma = np.empty((count, n_fine + 1))
    shifts = np.empty((count, 1))
    for i in range(count):
        rng = path_rng(master_seed, first_path_index + i)
        x0, shifts[i] = _draw_start_and_shift(spec, rng, 1)
        z = rng.standard_normal(n_fine)
        rng_vol = path_rng(master_seed, first_path_index + i, STREAM_VOL)
        zv = rng_vol.standard_normal(n_fine)
        w_aux = np.concatenate(([0.0], np.cumsum(zv) * sqrt_dt))
        sig = spec.sigma0 * (1.0 + spec.eta * np.sin(w_aux))
        sigma[i] = sig
        w[i, 0, 0] = 0.0
        np.cumsum(z * sqrt_dt, out=w[i, 1:, 0])
        if spec.drift is None:
            incr = sig[:-1] * z * sqrt_dt
            x[i, 0, 0] = x0[0]
            np.cumsum(incr, out=x[i, 1:, 0])
            x[i, 1:, 0] += x0[0]
        else:
            cur = float(x0[0])
            x[i, 0, 0] = cur
            for j in range(n_fine):
                b = float(np.asarray(spec.drift(times[j], np.array([cur]))).reshape(()))
                cur = cur + b * dt + sig[j] * z[j] * sqrt_dt
                x[i, j + 1, 0] = cur
    return PathBundle(grid, spec, master_seed, first_path_index,
                      x, w, sigma, None, shifts)


# ---------------------------------------------------------------------------
# one-step Euler approximation and regularity probe


def one_step_euler(bundle: PathBundle, path_index: int, s: float, t: float) -> np.ndarray:
    """X_s + b_s (t - s) + sigma_s (W_t - W_s), the frozen-coefficient
    approximation of X_t started at the fine node s."""
    if not (0 <= s <= t <= bundle.grid.horizon * (1 + 2 ** -40)):
        raise ConfigError(f"need 0 <= s <= t <= T, got s={s}, t={t}")
    if bundle.w is None:
        raise CapabilityError("bundle carries no driving Brownian motion")
    js = bundle.grid.fine_index(s)
    jt = bundle.grid.fine_index(t)
    x_s = bundle.x[path_index, js]
    dw = bundle.w[path_index, jt] - bundle.w[path_index, js]
    sig = bundle.sigma_path(path_index)[js]
    if isinstance(bundle.spec, StochVol):
        b = np.zeros(1) if bundle.spec.drift is None else np.asarray(
            bundle.spec.drift(s, x_s), float).reshape(1)
    else:
        b = bundle.drift_path(path_index)[js]
    return x_s + b * (t - s) + sig @ dw


@dataclass(frozen=True)
class RegularityProbe:
    """Empirical modulus of continuity of the diffusion coefficient."""

    lags: np.ndarray         # time lags s
    moduli: np.ndarray       # E[sup_{r <= s} |sigma_{t+r} - sigma_t|^2]
    slope: float             # log-log fit; estimates twice the exponent
    all_zero: bool


def regularity_probe(spec: ProcessSpec, grid: TimeGrid, count: int,
                     seed: int) -> RegularityProbe:
    """Estimate the modulus exponent of sigma from simulated (or
    deterministic) coefficient paths."""
    if isinstance(spec, BrownianMotion):
        raise ConfigError("regularity probe needs time-varying coefficients")
    n_fine = grid.fine_count
    if isinstance(spec, DeterministicGaussian):
        # deterministic coefficients: no ensemble needed
        sig = np.array([spec.diffusion_at(t).ravel()
                        for t in grid.fine_times])[None, :, :]
    else:
        bundle = simulate_paths(spec, grid, count, seed)
        sig = bundle.sigma[:, :, None]

    max_lag = max(1, n_fine // 4)
    lags = []
    lag = 1
    while lag <= max_lag:
        lags.append(lag)
        lag *= 2
    moduli = np.empty(len(lags))
    for idx, L in enumerate(lags):
        width = n_fine + 1 - L
        sup = np.zeros((sig.shape[0], width))
        base = sig[:, :width]
        for r in range(1, L + 1):
            dist = np.linalg.norm(sig[:, r:r + width] - base, axis=-1)
            np.maximum(sup, dist, out=sup)
        moduli[idx] = np.mean(sup ** 2)

    lag_times = np.asarray(lags) * grid.fine_step
    positive = moduli > 0
    if not positive.any():
        return RegularityProbe(lag_times, moduli, float("nan"), True)
    slope = np.polyfit(np.log(lag_times[positive]), np.log(moduli[positive]), 1)[0]
    return RegularityProbe(lag_times, moduli, float(slope), False)


def dump_paths_csv(bundle: PathBundle, stream) -> None:
    """Write fine-grid trajectories as CSV rows path_id,time,x_1..x_d."""
    d = bundle.dimension
    header = "path_id,time," + ",".join(f"x_{j + 1}" for j in range(d))
    stream.write(header + "\n")
    times = bundle.grid.fine_times
    ids = bundle.path_indices()
    for i in range(bundle.count):
        for j, t in enumerate(times):
            coords = ",".join(repr(float(v)) for v in bundle.x[i, j])
            stream.write(f"{ids[i]},{float(t)!r},{coords}\n")
