"""Front speed c* = inf_{lam > 0} mu(lam)/lam by one-dimensional minimization.

Every mu evaluation inside one search reuses the same master seed (common
random numbers), which makes g(lam) = mu_hat(lam)/lam a deterministic,
smooth function of lam within the run; golden-section search then only
needs unimodality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bounds import BoundsReport, check_bounds
from .lyapunov import LyapunovEstimate, mu_ensemble, mu_single_path
from .pde import SolverConfig
from .shear import ShearFieldSpec

__all__ = [
    "BracketExhausted",
    "SpeedResult",
    "cstar_homogeneous",
    "cstar",
    "golden_minimize",
    "GoldenResult",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class BracketExhausted(RuntimeError):
    """The minimum kept sitting at the right bracket edge through all expansions."""


def cstar_homogeneous(fprime0: float) -> tuple[float, float]:
    """Closed-form speed of the homogeneous medium: min of lam/2 + f'(0)/lam.

    Returns (c*, lam*) = (sqrt(2 f'(0)), sqrt(2 f'(0))).
    """
    if not (math.isfinite(fprime0) and fprime0 > 0):
        raise ValueError(f"f'(0) must be positive, got {fprime0}")
    c0 = math.sqrt(2.0 * fprime0)
    return c0, c0


@dataclass(frozen=True)
class GoldenResult:
    x_star: float
    f_star: float
    bracket: tuple[float, float]
    widths: tuple[float, ...]
    at_right_edge: bool


def golden_minimize(fn, lo: float, hi: float, tol: float) -> GoldenResult:
    """Golden-section search for the minimum of a unimodal fn on [lo, hi].

    Shrinks the bracket by the golden ratio each iteration until its width
    drops below tol; x_star is the best evaluated interior point.  The
    at_right_edge flag reports a minimum hugging hi (bracket too small).
    """
    if not (tol > 0 and hi > lo):
        raise ValueError("golden_minimize needs hi > lo and tol > 0")
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    widths = [b - a]
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = fn(x2)
        widths.append(b - a)
    x_star, f_star = (x1, f1) if f1 <= f2 else (x2, f2)
    at_edge = (hi - b) <= 2.0 * tol
    return GoldenResult(x_star=x_star, f_star=f_star, bracket=(a, b),
                        widths=tuple(widths), at_right_edge=at_edge)


@dataclass(frozen=True)
class SpeedResult:
    c_star: float
    lambda_star: float
    mu_at_star: float
    stderr_mu: float
    stderr_c: float
    bracket: tuple[float, float]
    bracket_widths: tuple[float, ...]
    evaluations: tuple[tuple[float, float, float], ...]  # (lam, mu_hat, stderr)
    bounds_report: BoundsReport
    fprime0: float
    horizon: float
    n_paths: int
    master_seed: int
    estimator: str


def cstar(spec: ShearFieldSpec, fprime0: float = 1.0, *, estimator: str = "ensemble",
          n_paths: int = 20, horizon: float = 2000.0, master_seed: int,
          lambda_tol: float = 1e-3, config: SolverConfig | None = None,
          jobs: int = 1) -> SpeedResult:
    """Minimize mu_hat(lam)/lam over lam with common random numbers.

    The initial bracket (0.05, 4 sqrt(2 f'(0))] comfortably contains the
    homogeneous minimizer sqrt(2 f'(0)); it is doubled rightward up to four
    times if the minimum sits at the right edge.  Identical inputs give a
    bit-identical result.
    """
    if lambda_tol <= 0:
        raise ValueError(f"lambda_tol must be positive, got {lambda_tol}")
    if estimator not in ("single", "ensemble"):
        raise ValueError(f"estimator must be 'single' or 'ensemble', got {estimator!r}")
    config = config or SolverConfig()

    cache: dict[float, LyapunovEstimate] = {}
    order: list[float] = []

    def mu_at(lam: float) -> LyapunovEstimate:
        if lam not in cache:
            if estimator == "single":
                cache[lam] = mu_single_path(spec, lam, fprime0, horizon, master_seed, config)
            else:
                cache[lam] = mu_ensemble(spec, lam, fprime0, horizon, n_paths,
                                         master_seed, config, jobs=jobs)
            order.append(lam)
        return cache[lam]

    def g(lam: float) -> float:
        return mu_at(lam).mu_hat / lam

    lo = 0.05
    hi = 4.0 * math.sqrt(2.0 * fprime0)
    result = None
    for expansion in range(5):
        result = golden_minimize(g, lo, hi, lambda_tol)
        if not result.at_right_edge:
            break
        if expansion == 4:
            raise BracketExhausted(
                f"minimum stayed at the right edge after 4 expansions (hi={hi})")
        hi *= 2.0

    best = mu_at(result.x_star)
    lam_star = result.x_star
    c_star = best.mu_hat / lam_star
    stderr_c = best.stderr / lam_star
    report = check_bounds(c_star, stderr_c, spec, fprime0)
    evals = tuple((lam, cache[lam].mu_hat, cache[lam].stderr) for lam in order)
    return SpeedResult(
        c_star=c_star, lambda_star=lam_star, mu_at_star=best.mu_hat,
        stderr_mu=best.stderr, stderr_c=stderr_c,
        bracket=(lo, hi), bracket_widths=result.widths, evaluations=evals,
        bounds_report=report, fprime0=fprime0, horizon=horizon,
        n_paths=best.n_paths, master_seed=int(master_seed), estimator=estimator)
