"""Monte Carlo studies: convergence rates, limit laws, efficiency, diagnostics.

Every study simulates path ensembles in fixed-size chunks whose random
streams depend only on (master seed, path index), so results are identical
for any thread count. Within a study all estimators share the same paths
(common random numbers); across grid resolutions paths are re-simulated
from the same master seed.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2, kstest

from .errors import CapabilityError, ConfigError
from .estimators import (
    bridge_conditional_estimate,
    reference_value,
    riemann_estimate,
    trapezoid_estimate,
)
from .functions import TestFunction, eval_on_path
from .fourier import compute_E, compute_F1, compute_F2, decompose, g_decay_probe
from .grids import build_grid
from .limits import conditional_variances
from .processes import BrownianMotion, ProcessSpec, simulate_paths

ESTIMATOR_NAMES = ("riemann", "trapezoid", "bridge")
DEGENERATE_RMS = 1e-12
CHUNK_SIZE = 256


@dataclass(frozen=True)
class StudyConfig:
    spec: ProcessSpec
    function: TestFunction
    n_list: tuple[int, ...]
    refine: int
    paths: int
    master_seed: int
    kind: str
    estimators: tuple[str, ...] = ("riemann", "trapezoid")
    t_eval: float | None = None
    horizon: float = 1.0
    threads: int = 1
    u_list: tuple[float, ...] = (1.0, 3.0, 10.0)

    def __post_init__(self):
        if self.kind not in ("rate", "clt", "efficiency", "diagnostics"):
            raise ConfigError(f"unknown study kind {self.kind!r}")
        if not self.n_list:
            raise ConfigError("n_list must be non-empty")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ConfigError("n_list must be strictly increasing")
        if self.paths < 100:
            raise ConfigError(f"need at least 100 paths, got {self.paths}")
        for name in self.estimators:
            if name not in ESTIMATOR_NAMES:
                raise ConfigError(f"unknown estimator {name!r}; "
                                  f"choose from {ESTIMATOR_NAMES}")

    @property
    def eval_time(self) -> float:
        return self.horizon if self.t_eval is None else self.t_eval


@dataclass(frozen=True)
class StudyReport:
    kind: str
    tables: dict = field(default_factory=dict)   # name -> list of row dicts
    summary: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0


def _ensemble_map(spec, grid, paths: int, seed: int, worker,
                  threads: int = 1, chunk_size: int | None = None) -> dict:
    """Apply ``worker(bundle) -> dict of arrays`` chunk-wise and concatenate.

    Per-path random streams make the result independent of the chunk
    layout and of ``threads``; the chunk size only bounds peak memory, so
    it shrinks as the fine grid grows.
    """
    if chunk_size is None:
        nodes = grid.fine_count + 1
        chunk_size = int(np.clip(2 ** 21 // nodes, 16, CHUNK_SIZE))
    starts = list(range(0, paths, chunk_size))

    def run(start):
        count = min(chunk_size, paths - start)
        bundle = simulate_paths(spec, grid, count, seed, first_path_index=start)
        return worker(bundle)

    if threads <= 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _estimator_errors(f: TestFunction, bundle, t: float,
                      estimators) -> dict:
    """Reference minus estimator per path, on shared paths."""
    grid = bundle.grid
    fine_vals = eval_on_path(f, bundle, which="fine")
    ref = reference_value(fine_vals, grid, t)
    coarse_vals = fine_vals[:, ::grid.refine_factor]
    out = {}
    for name in estimators:
        if name == "riemann":
            est = riemann_estimate(coarse_vals, grid, t)
        elif name == "trapezoid":
            est = trapezoid_estimate(coarse_vals, grid, t)
        else:
            y = bundle.coarse_x() + bundle.shifts[:, None, :]
            x_arg = y[:, :, 0] if f.dimension == 1 else y
            est = bridge_conditional_estimate(f, x_arg, grid, t,
                                              spec=bundle.spec)
        out[f"err_{name}"] = ref - est
    return out


def _rms_stats(err: np.ndarray) -> dict:
    sq = err ** 2
    count = len(err)
    mse = float(sq.mean())
    rms = float(np.sqrt(mse))
    se_mse = float(sq.std(ddof=1) / np.sqrt(count)) if count > 1 else 0.0
    se_rms = se_mse / (2.0 * rms) if rms > 0 else 0.0
    se_mean = float(err.std(ddof=1) / np.sqrt(count)) if count > 1 else 0.0
    return {"rms": rms, "rms_se": se_rms,
            "mean_error": float(err.mean()), "mean_se": se_mean}


def _wls_line(x: np.ndarray, y: np.ndarray, se: np.ndarray):
    """Weighted least squares y ~ a + b x. Returns (slope, slope_se, chi2)."""
    se = np.where(se > 0, se, max(np.max(se), 1e-12) * 1e-3)
    w = 1.0 / se ** 2
    design = np.column_stack([np.ones_like(x), x])
    gram = design.T @ (w[:, None] * design)
    rhs = design.T @ (w * y)
    cov = np.linalg.inv(gram)
    coef = cov @ rhs
    resid = y - design @ coef
    chi_sq = float(np.sum(w * resid ** 2))
    return float(coef[1]), float(np.sqrt(cov[1, 1])), chi_sq


def _fit_slope(deltas, rms, rms_se):
    """Log-log slope of RMS vs step, with a lack-of-fit fallback that drops
    the coarsest resolution (preasymptotic regime)."""
    log_x = np.log(np.asarray(deltas))
    log_y = np.log(np.asarray(rms))
    log_se = np.asarray(rms_se) / np.asarray(rms)
    slope, slope_se, chi_sq = _wls_line(log_x, log_y, log_se)
    dropped = False
    dof = len(deltas) - 2
    if dof >= 1 and chi_sq > chi2.ppf(0.99, dof) and len(deltas) >= 4:
        # drop the smallest n (largest step)
        keep = np.argsort(log_x)[:-1]
        slope, slope_se, chi_sq = _wls_line(log_x[keep], log_y[keep],
                                            log_se[keep])
        dropped = True
    return {"slope": slope, "slope_se": slope_se,
            "slope_ci_low": slope - 1.96 * slope_se,
            "slope_ci_high": slope + 1.96 * slope_se,
            "lack_of_fit_chi2": chi_sq, "dropped_smallest_n": dropped}


def _check_refine(cfg: StudyConfig):
    if cfg.refine < 8:
        raise ConfigError(
            f"reference refinement m={cfg.refine} too coarse; need m >= 8")


def rate_study(cfg: StudyConfig) -> StudyReport:
    """RMS of (reference - estimator) per resolution, with a weighted
    log-log slope fit per estimator."""
    _check_refine(cfg)
    started = time.perf_counter()
    t = cfg.eval_time
    rows = []
    per_est = {name: {"delta": [], "rms": [], "rms_se": []}
               for name in cfg.estimators}
    for n in cfg.n_list:
        grid = build_grid(cfg.horizon, n, cfg.refine)
        stats = _ensemble_map(
            cfg.spec, grid, cfg.paths, cfg.master_seed,
            lambda b: _estimator_errors(cfg.function, b, t, cfg.estimators),
            cfg.threads)
        for name in cfg.estimators:
            st = _rms_stats(stats[f"err_{name}"])
            rows.append({"n": n, "delta": grid.coarse_step,
                         "estimator": name, **st})
            per_est[name]["delta"].append(grid.coarse_step)
            per_est[name]["rms"].append(st["rms"])
            per_est[name]["rms_se"].append(st["rms_se"])

    summary = {}
    for name in cfg.estimators:
        data = per_est[name]
        if max(data["rms"]) <= DEGENERATE_RMS:
            summary[name] = {"degenerate": True, "slope": float("nan")}
        elif len(cfg.n_list) < 2:
            summary[name] = {"degenerate": False, "slope": float("nan")}
        else:
            summary[name] = {"degenerate": False,
                             **_fit_slope(data["delta"], data["rms"],
                                          data["rms_se"])}
    return StudyReport("rate", {"rates": rows}, summary,
                       time.perf_counter() - started)


def clt_check(cfg: StudyConfig) -> StudyReport:
    """Distributional checks at the finest configured resolution.

    Trapezoid errors are standardized by the per-path conditional variance
    and compared with the standard normal (Kolmogorov-Smirnov); scaled
    Riemann errors are compared with the realized endpoint bias.
    """
    _check_refine(cfg)
    if cfg.function.gradient is None:
        raise CapabilityError(
            f"clt check needs a gradient; {cfg.function.name} has none")
    started = time.perf_counter()
    f = cfg.function
    t = cfg.eval_time
    n = cfg.n_list[-1]
    grid = build_grid(cfg.horizon, n, cfg.refine)
    delta = grid.coarse_step

    def worker(bundle):
        out = _estimator_errors(f, bundle, t, ("riemann", "trapezoid"))
        out["condvar"] = conditional_variances(f, bundle)
        y = bundle.x + bundle.shifts[:, None, :]
        ends = f.value(y[:, [0, grid.fine_index(t)], 0] if f.dimension == 1
                       else y[:, [0, grid.fine_index(t)], :])
        out["bias_realized"] = 0.5 * (ends[:, 1] - ends[:, 0]).real
        return out

    stats = _ensemble_map(cfg.spec, grid, cfg.paths, cfg.master_seed,
                          worker, cfg.threads)
    condvar = stats["condvar"]
    keep = condvar > 0
    excluded = int(np.sum(~keep))
    z = (stats["err_trapezoid"][keep] / (delta * np.sqrt(condvar[keep])))
    ks_stat, ks_p = kstest(z, "norm")

    scaled_riemann = stats["err_riemann"] / delta
    scaled_trap = stats["err_trapezoid"] / delta
    bias = stats["bias_realized"]
    diff = scaled_riemann - bias
    count = len(diff)

    summary = {
        "n": n, "delta": delta,
        "ks_stat": float(ks_stat), "ks_pvalue": float(ks_p),
        "excluded_zero_variance": excluded,
        "scaled_trapezoid_mean": float(scaled_trap.mean()),
        "scaled_trapezoid_mean_se": float(scaled_trap.std(ddof=1) / np.sqrt(count)),
        "scaled_riemann_mean": float(scaled_riemann.mean()),
        "scaled_riemann_mean_se": float(scaled_riemann.std(ddof=1) / np.sqrt(count)),
        "bias_target_mean": float(bias.mean()),
        "bias_minus_riemann_mean": float(diff.mean()),
        "bias_minus_riemann_se": float(diff.std(ddof=1) / np.sqrt(count)),
    }
    table = [{"path_id": int(i), "z": float(v)}
             for i, v in zip(np.nonzero(keep)[0], z)]
    return StudyReport("clt", {"standardized": table}, summary,
                       time.perf_counter() - started)


def efficiency_study(cfg: StudyConfig) -> StudyReport:
    """Scaled RMS per estimator against the minimal asymptotic constant."""
    _check_refine(cfg)
    if not isinstance(cfg.spec, BrownianMotion):
        raise ConfigError("efficiency study requires a Brownian specification")
    if cfg.function.gradient is None:
        raise CapabilityError(
            f"efficiency study needs a gradient; {cfg.function.name} has none")
    started = time.perf_counter()
    f = cfg.function
    t = cfg.eval_time
    estimators = cfg.estimators or ("riemann", "trapezoid", "bridge")

    rows = []
    scaled_at_top = {}
    for n in cfg.n_list:
        grid = build_grid(cfg.horizon, n, cfg.refine)
        delta = grid.coarse_step
        stats = _ensemble_map(
            cfg.spec, grid, cfg.paths, cfg.master_seed,
            lambda b: _estimator_errors(f, b, t, estimators), cfg.threads)
        for name in estimators:
            st = _rms_stats(stats[f"err_{name}"] / delta)
            rows.append({"n": n, "delta": delta, "estimator": name,
                         "scaled_rms": st["rms"], "scaled_rms_se": st["rms_se"]})
            if n == cfg.n_list[-1]:
                scaled_at_top[name] = (st["rms"], st["rms_se"])

    top_grid = build_grid(cfg.horizon, cfg.n_list[-1], cfg.refine)
    lb_stats = _ensemble_map(
        cfg.spec, top_grid, cfg.paths, cfg.master_seed,
        lambda b: {"integral": _grad_integral(f, b)}, cfg.threads)
    integrals = lb_stats["integral"]
    mean = float(integrals.mean())
    se_mean = float(integrals.std(ddof=1) / np.sqrt(len(integrals)))
    lower = float(np.sqrt(mean))
    lower_se = se_mean / (2.0 * lower) if lower > 0 else se_mean

    summary = {"lower_bound": lower, "lower_bound_se": lower_se}
    if "trapezoid" in scaled_at_top and lower > 0:
        val, se = scaled_at_top["trapezoid"]
        ratio = val / lower
        ratio_se = ratio * np.sqrt((se / val) ** 2 + (lower_se / lower) ** 2) \
            if val > 0 else 0.0
        summary["efficiency_ratio_trapezoid"] = float(ratio)
        summary["efficiency_ratio_se"] = float(ratio_se)
    for name, (val, se) in scaled_at_top.items():
        summary[f"scaled_rms_{name}"] = val
        summary[f"scaled_rms_{name}_se"] = se
    return StudyReport("efficiency", {"efficiency": rows}, summary,
                       time.perf_counter() - started)


def _grad_integral(f: TestFunction, bundle) -> np.ndarray:
    """(1/12) int |grad f(Y_t)|^2 dt per path (fine trapezoid)."""
    _, grad = eval_on_path(f, bundle, which="fine", gradient=True)
    sq = np.sum(grad ** 2, axis=2)
    return np.trapezoid(sq, dx=bundle.grid.fine_step, axis=1) / 12.0


def diagnostics_study(cfg: StudyConfig) -> StudyReport:
    """Frequency-domain diagnostics: normalized F1/F2 second-moment decay
    over (u, n), and the decomposition identity residuals on a small
    exponential probe ensemble."""
    started = time.perf_counter()
    probe = g_decay_probe(cfg.u_list, cfg.n_list, cfg.spec,
                          min(cfg.paths, 2000), cfg.master_seed)
    g_rows = [{"u": r.u, "n": r.n, "g_hat": r.g_hat, "stderr": r.stderr}
              for r in probe.rows]
    trend_rows = [{"u": u, "kendall_tau": tau, "p_value": p}
                  for u, (tau, p) in probe.trend.items()]

    summary = {"sup_g_hat": probe.sup_over_grid}
    if cfg.refine >= 2 and cfg.spec.dimension == 1:
        from .functions import complex_exponential
        f = complex_exponential(float(cfg.u_list[0]))
        grid = build_grid(cfg.horizon, cfg.n_list[0], cfg.refine)
        bundle = simulate_paths(cfg.spec, grid, min(cfg.paths, 100),
                                cfg.master_seed)
        fine_vals = eval_on_path(f, bundle, which="fine")
        realized = (reference_value(fine_vals, grid)
                    - riemann_estimate(fine_vals[:, ::grid.refine_factor], grid))
        trace = decompose(f, bundle)
        u0 = float(cfg.u_list[0])
        drift_gap = (trace.drift - compute_E(f, bundle)
                     - compute_F1(u0, bundle) - compute_F2(u0, bundle))
        summary["max_decomposition_residual"] = float(
            np.max(np.abs(trace.total - realized)))
        summary["max_drift_identity_residual"] = float(
            np.max(np.abs(drift_gap)))
    return StudyReport("diagnostics",
                       {"g_decay": g_rows, "g_trend": trend_rows},
                       summary, time.perf_counter() - started)


def run_study(cfg: StudyConfig) -> StudyReport:
    runner = {"rate": rate_study, "clt": clt_check,
              "efficiency": efficiency_study,
              "diagnostics": diagnostics_study}[cfg.kind]
    return runner(cfg)
