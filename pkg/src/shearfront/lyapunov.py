"""Lyapunov exponent mu(lam) = f'(0) + lam^2/2 + rho(lam) estimators.

Single-path and ensemble estimators of the growth rate of log ||phi||_1,
a dense eigenvalue oracle for the steady-shear limit, and the variance and
distribution diagnostics behind the convergence figures.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .pde import SolverConfig, evolve, evolve_with_paths
from .ou import OUPath
from .seeding import PATH_STREAM, derive_seed
from .shear import ShearFieldSpec, ShearProfile, eval_profile

__all__ = [
    "KPPNonlinearity",
    "LyapunovEstimate",
    "SeedCollision",
    "geometric_times",
    "mu_single_path",
    "mu_single_path_from_paths",
    "mu_ensemble",
    "ensemble_growth_trace",
    "VarianceDecay",
    "variance_decay_diagnostic",
    "mu_distribution_snapshot",
    "steady_shear_rho_oracle",
    "write_mu_trace",
    "write_mu_summary",
    "write_histogram",
    "write_variance_table",
]


class SeedCollision(ValueError):
    """Two ensemble members were handed the same seed."""


@dataclass(frozen=True)
class KPPNonlinearity:
    """KPP reaction; only the linearization f'(0) enters the speed formula."""

    fprime0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.fprime0) and self.fprime0 > 0):
            raise ValueError(f"f'(0) must be positive, got {self.fprime0}")


@dataclass(frozen=True)
class LyapunovEstimate:
    lam: float
    mu_hat: float
    rho_hat: float
    series: np.ndarray  # rows (t, mu_t)
    stderr: float
    n_paths: int
    horizon: float
    error_bar: bool  # False marks the single-path mode (no error theory)

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")


def geometric_times(horizon: float, t0: float = 1.0, ratio: float = 1.1) -> np.ndarray:
    """Geometric sample times t0 * ratio^k capped at (and including) horizon."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    t0 = min(t0, horizon)
    ts = [t0]
    while ts[-1] * ratio < horizon:
        ts.append(ts[-1] * ratio)
    if ts[-1] != horizon:
        ts.append(horizon)
    return np.asarray(ts)


def _estimate(lam: float, fprime0: float, times: np.ndarray, growths: np.ndarray,
              stderr: float, n_paths: int, error_bar: bool) -> LyapunovEstimate:
    drift = fprime0 + 0.5 * lam * lam
    mu_series = np.column_stack([times, drift + growths])
    mu_hat = drift + float(growths[-1])
    # recomputed this way so the decomposition identity holds bit-exactly
    rho_hat = mu_hat - fprime0 - 0.5 * lam * lam
    return LyapunovEstimate(lam=lam, mu_hat=mu_hat, rho_hat=rho_hat, series=mu_series,
                            stderr=stderr, n_paths=n_paths, horizon=float(times[-1]),
                            error_bar=error_bar)


def _growths(series: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    times = series[:, 0]
    if np.any(times <= 0):
        raise ValueError("growth rates need strictly positive sample times")
    return times, series[:, 1] / times


def mu_single_path(spec: ShearFieldSpec, lam: float, fprime0: float, horizon: float,
                   seed: int, config: SolverConfig | None = None) -> LyapunovEstimate:
    """mu estimate from one realization evolved to the horizon.

    The running estimate is sampled on a geometric time grid so convergence
    traces have uniform density in log t.  No error bar is attached.
    """
    config = config or SolverConfig()
    series = evolve(spec, lam, horizon, seed, config, geometric_times(horizon))
    times, growths = _growths(series)
    return _estimate(lam, fprime0, times, growths, stderr=0.0, n_paths=1, error_bar=False)


def mu_single_path_from_paths(spec: ShearFieldSpec, lam: float, fprime0: float,
                              paths: list[OUPath],
                              config: SolverConfig | None = None) -> LyapunovEstimate:
    """Like mu_single_path but against explicit OU paths (coupling hook)."""
    config = config or SolverConfig()
    horizon = min(p.horizon for p in paths)
    series = evolve_with_paths(spec, lam, paths, config, geometric_times(horizon))
    times, growths = _growths(series)
    return _estimate(lam, fprime0, times, growths, stderr=0.0, n_paths=1, error_bar=False)


def ensemble_seeds(master_seed: int, n_paths: int) -> list[int]:
    return [derive_seed(master_seed, PATH_STREAM, i) for i in range(n_paths)]


def _check_seeds(seeds) -> list[int]:
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        raise SeedCollision("ensemble seeds must be pairwise distinct")
    return seeds


def _path_growth_series(spec, lam, horizon, seed, config, times) -> np.ndarray:
    series = evolve(spec, lam, horizon, seed, config, times)
    ts, growths = _growths(series)
    return growths


def _map_paths(fn, seeds, jobs: int):
    if jobs <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, seeds))


def mu_ensemble(spec: ShearFieldSpec, lam: float, fprime0: float, horizon: float,
                n_paths: int, master_seed: int, config: SolverConfig | None = None,
                seeds=None, jobs: int = 1) -> LyapunovEstimate:
    """Ensemble-mean mu estimate over independent realizations.

    The mean over realizations converges much faster in t than a single
    sample, which is what makes moderate horizons usable.  stderr is the
    cross-path sample standard error of the growth rates; the reduction
    uses numpy pairwise summation so worker order cannot move the result.
    """
    if n_paths < 2:
        raise ValueError(f"ensemble mode needs n_paths >= 2, got {n_paths}")
    config = config or SolverConfig()
    seeds = _check_seeds(seeds if seeds is not None else ensemble_seeds(master_seed, n_paths))
    if len(seeds) != n_paths:
        raise ValueError(f"got {len(seeds)} seeds for {n_paths} paths")
    times = geometric_times(horizon)
    rows = _map_paths(lambda s: _path_growth_series(spec, lam, horizon, s, config, times),
                      seeds, jobs)
    growths = np.vstack(rows)
    mean_growth = growths.mean(axis=0)
    stderr = float(growths[:, -1].std(ddof=1) / math.sqrt(n_paths))
    return _estimate(lam, fprime0, times, mean_growth, stderr=stderr,
                     n_paths=n_paths, error_bar=True)


def ensemble_growth_trace(spec: ShearFieldSpec, lam: float, fprime0: float,
                          horizon: float, n_paths: int, master_seed: int,
                          checkpoints, config: SolverConfig | None = None,
                          jobs: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Per-path running estimates mu_t at the checkpoints.

    Returns (times, matrix) with matrix[i, k] the i-th path's mu_t at
    checkpoint k; feeds both the variance-decay and distribution diagnostics.
    """
    config = config or SolverConfig()
    seeds = _check_seeds(ensemble_seeds(master_seed, n_paths))
    times = np.asarray(sorted(float(t) for t in checkpoints))
    if np.any(times <= 0) or times.shape[0] == 0:
        raise ValueError("checkpoints must be positive")
    rows = _map_paths(lambda s: _path_growth_series(spec, lam, horizon, s, config, times),
                      seeds, jobs)
    drift = fprime0 + 0.5 * lam * lam
    return times, drift + np.vstack(rows)


@dataclass(frozen=True)
class VarianceDecay:
    times: np.ndarray
    variances: np.ndarray
    slope: float  # least-squares slope of log Var[mu_t] vs log t


def variance_decay_diagnostic(spec: ShearFieldSpec, lam: float, fprime0: float,
                              horizon: float, n_paths: int, master_seed: int,
                              checkpoints, config: SolverConfig | None = None,
                              jobs: int = 1, trace=None) -> VarianceDecay:
    """Cross-path variance of mu_t at each checkpoint plus its log-log slope.

    The variance of the running estimate decays like 1/t; a degenerate
    (identically zero variance) table reports slope nan.  A precomputed
    (times, mu matrix) trace can be passed to share one ensemble across
    diagnostics.
    """
    if n_paths < 100:
        raise ValueError(f"variance diagnostic needs n_paths >= 100, got {n_paths}")
    times, mu = trace if trace is not None else ensemble_growth_trace(
        spec, lam, fprime0, horizon, n_paths, master_seed, checkpoints, config, jobs)
    variances = mu.var(axis=0, ddof=1)
    if np.any(variances <= 0):
        slope = math.nan
    else:
        slope = float(np.polyfit(np.log(times), np.log(variances), 1)[0])
    return VarianceDecay(times=times, variances=variances, slope=slope)


def mu_distribution_snapshot(spec: ShearFieldSpec, lam: float, fprime0: float,
                             horizon: float, n_paths: int, master_seed: int,
                             snapshot_times, config: SolverConfig | None = None,
                             jobs: int = 1, n_bins: int = 40,
                             trace=None) -> list[tuple[float, float, float, int]]:
    """Histogram rows (t, bin_lo, bin_hi, count) of mu_t at each snapshot time.

    One fixed bin layout spans the pooled range of all snapshots so the
    per-time histograms are directly comparable.
    """
    if n_paths < 100:
        raise ValueError(f"distribution snapshot needs n_paths >= 100, got {n_paths}")
    times, mu = trace if trace is not None else ensemble_growth_trace(
        spec, lam, fprime0, horizon, n_paths, master_seed, snapshot_times, config, jobs)
    lo = float(mu.min())
    hi = float(mu.max())
    if hi <= lo:  # degenerate spread: park all mass in one bin around the value
        lo, hi = lo - 0.5, lo + 0.5
    edges = np.linspace(lo, hi, n_bins + 1)
    rows: list[tuple[float, float, float, int]] = []
    for k, t in enumerate(times):
        counts, _ = np.histogram(mu[:, k], bins=edges)
        rows.extend((float(t), float(edges[i]), float(edges[i + 1]), int(counts[i]))
                    for i in range(n_bins))
    return rows


def steady_shear_rho_oracle(profile: ShearProfile, lam: float, dy: float = 0.01) -> float:
    """Growth rate of the frozen-shear problem by a dense symmetric eigensolve.

    With b frozen in time the growth rate is the principal eigenvalue of
    1/2 d_yy - lam b1(y) discretized with the same periodic second-difference
    stencil as the time stepper, so spatial discretization error cancels in
    comparisons.
    """
    m = round(1.0 / dy)
    if abs(m * dy - 1.0) > 1e-9:
        raise ValueError(f"dy={dy} must divide the unit period")
    if m > 4096:
        raise ValueError(f"dense eigensolve capped at 4096 points, got {m}")
    grid = np.arange(m) / m
    w = 1.0 / (2.0 * dy * dy)
    a = np.zeros((m, m))
    idx = np.arange(m)
    a[idx, idx] = -2.0 * w - lam * np.asarray(eval_profile(profile, grid), dtype=float)
    a[idx, (idx + 1) % m] += w
    a[idx, (idx - 1) % m] += w
    return float(np.linalg.eigvalsh(a)[-1])


def write_mu_trace(estimates, path) -> None:
    """CSV of running estimates with columns lambda,t,mu_t."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda", "t", "mu_t"])
        for est in estimates:
            for t, mu_t in est.series:
                writer.writerow([repr(float(est.lam)), repr(float(t)), repr(float(mu_t))])


def write_mu_summary(estimates, path) -> None:
    """CSV summary with columns lambda,mu_hat,rho_hat,stderr,n_paths,horizon."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda", "mu_hat", "rho_hat", "stderr", "n_paths", "horizon"])
        for est in estimates:
            writer.writerow([repr(float(est.lam)), repr(float(est.mu_hat)),
                             repr(float(est.rho_hat)), repr(float(est.stderr)),
                             est.n_paths, repr(float(est.horizon))])


def write_histogram(rows, path) -> None:
    """CSV of histogram rows with columns t,bin_lo,bin_hi,count."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "bin_lo", "bin_hi", "count"])
        for t, lo, hi, count in rows:
            writer.writerow([repr(float(t)), repr(float(lo)), repr(float(hi)), int(count)])


def write_variance_table(decay: VarianceDecay, path) -> None:
    """CSV of the variance decay table with columns t,var_mu."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "var_mu"])
        for t, v in zip(decay.times, decay.variances):
            writer.writerow([repr(float(t)), repr(float(v))])
