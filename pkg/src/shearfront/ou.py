"""Stationary Ornstein-Uhlenbeck realizations on a fixed fine time grid.

Two integrators are provided: the implicit order-2.0 strong Taylor scheme
used in production (step_taylor2, generate_path) and the exact Gaussian
transition (step_exact) that serves as the authoritative oracle in tests.
Paths never hit disk; they are regenerated bit-identically from their seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import ou_path_from_normals
from .shear import OUParams

__all__ = [
    "OUPath",
    "sample_stationary_init",
    "step_exact",
    "step_taylor2",
    "path_from_normals",
    "generate_path",
    "empirical_covariance",
    "strong_error_vs_exact",
]


@dataclass(frozen=True)
class OUPath:
    """One realization of b2 at t_j = j * dt_fine, fully determined by its seed."""

    params: OUParams
    dt_fine: float
    samples: np.ndarray
    seed: int

    @property
    def horizon(self) -> float:
        return (self.samples.shape[0] - 1) * self.dt_fine

    def negated(self) -> "OUPath":
        """Sign-flipped copy (flips the initial draw and every increment).

        Used by the evenness couplings; the stored seed no longer
        regenerates the samples.
        """
        return OUPath(self.params, self.dt_fine, -self.samples, self.seed)


def sample_stationary_init(params: OUParams, rng: np.random.Generator) -> float:
    """Draw from the stationary law N(0, r^2 / (2a))."""
    return params.stationary_std * rng.standard_normal()


def step_exact(params: OUParams, b: float, dt: float, rng: np.random.Generator) -> float:
    """Exact OU transition over dt: decay e^(-a dt) plus the exact Gaussian kick."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ed = math.exp(-params.a * dt)
    std = params.stationary_std * math.sqrt(1.0 - ed * ed)
    return b * ed + std * rng.standard_normal()


def _taylor2_coefficients(params: OUParams, dt: float) -> tuple[float, float, float]:
    denom = 1.0 + 0.5 * params.a * dt
    decay = (1.0 - 0.5 * params.a * dt) / denom
    c1 = params.r * math.sqrt(dt) / denom
    c2 = -params.a * params.r * dt * math.sqrt(dt) / (2.0 * math.sqrt(3.0) * denom)
    return decay, c1, c2


def step_taylor2(params: OUParams, b: float, dt: float, rng: np.random.Generator) -> float:
    """One implicit order-2.0 strong Taylor step (Kloeden-Platen family).

    For the linear drift -a*b with additive noise the scheme reduces to the
    trapezoidal-implicit update

        b' = [b (1 - a dt/2) + r dW - a r (dZ - dt dW / 2)] / (1 + a dt/2)

    with dW = sqrt(dt) u1 and the time-integrated increment
    dZ = dt^(3/2) (u1 + u2/sqrt(3)) / 2.  The u1 parts cancel into the two
    closed-form noise coefficients below.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if params.a * dt >= 1.0:
        raise ValueError(f"stability margin requires a*dt < 1, got {params.a * dt}")
    decay, c1, c2 = _taylor2_coefficients(params, dt)
    u1 = rng.standard_normal()
    u2 = rng.standard_normal()
    return decay * b + c1 * u1 + c2 * u2


def path_from_normals(params: OUParams, dt_fine: float, b0: float,
                      normals: np.ndarray) -> np.ndarray:
    """Run the Taylor recursion from b0 over a (n, 2) array of standard normals.

    Exposed separately so couplings can feed sign-flipped or otherwise
    transformed increments; the whole path is linear in (b0, normals).
    """
    normals = np.ascontiguousarray(normals, dtype=float)
    if normals.ndim != 2 or normals.shape[1] != 2:
        raise ValueError(f"normals must have shape (n, 2), got {normals.shape}")
    if params.a * dt_fine >= 1.0:
        raise ValueError(f"stability margin requires a*dt_fine < 1, got {params.a * dt_fine}")
    out = np.empty(normals.shape[0] + 1)
    ou_path_from_normals(params.a, params.r, dt_fine, float(b0), normals, out)
    return out


def generate_path(params: OUParams, horizon: float, dt_fine: float, seed: int) -> OUPath:
    """Stationary init then repeated Taylor steps; bit-identical in the seed."""
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if dt_fine <= 0:
        raise ValueError(f"dt_fine must be positive, got {dt_fine}")
    n = int(math.ceil(horizon / dt_fine - 1e-12))
    rng = np.random.default_rng(np.uint64(seed))
    b0 = sample_stationary_init(params, rng)
    normals = rng.standard_normal((n, 2))
    samples = path_from_normals(params, dt_fine, b0, normals)
    return OUPath(params=params, dt_fine=dt_fine, samples=samples, seed=int(seed))


def empirical_covariance(path: OUPath, lag: float) -> float:
    """Time-average estimate of E[b2(t) b2(t + lag)] along one path."""
    k = lag / path.dt_fine
    k_int = int(round(k))
    if abs(k - k_int) > 1e-9 * max(1.0, abs(k)):
        raise ValueError(f"lag {lag} is not a multiple of dt_fine {path.dt_fine}")
    if lag >= path.horizon / 2:
        raise ValueError(f"lag {lag} too large for horizon {path.horizon}")
    s = path.samples
    n = s.shape[0] - k_int
    return float(np.mean(s[:n] * s[k_int:k_int + n]))


def strong_error_vs_exact(params: OUParams, t_final: float, dt: float,
                          n_paths: int, seed: int) -> float:
    """RMS gap at t_final between Taylor and exact paths driven by one Brownian motion.

    Per step the Gaussian triple (dW, dZ, G) is drawn with its exact joint
    covariance (G is the exact transition kick), so both integrators see the
    same underlying noise and the gap measures pure scheme error.
    """
    a, r = params.a, params.r
    n = int(round(t_final / dt))
    ed = math.exp(-a * dt)
    cov = np.array([
        [dt, dt * dt / 2.0, r * (1.0 - ed) / a],
        [dt * dt / 2.0, dt**3 / 3.0, r * (1.0 - ed * (1.0 + a * dt)) / a**2],
        [r * (1.0 - ed) / a, r * (1.0 - ed * (1.0 + a * dt)) / a**2,
         r * r * (1.0 - ed * ed) / (2.0 * a)],
    ])
    chol = np.linalg.cholesky(cov)
    decay, _, _ = _taylor2_coefficients(params, dt)
    denom = 1.0 + 0.5 * a * dt

    rng = np.random.default_rng(np.uint64(seed))
    x = params.stationary_std * rng.standard_normal(n_paths)
    y = x.copy()
    for _ in range(n):
        dw, dz, g = chol @ rng.standard_normal((3, n_paths))
        x = ed * x + g
        y = decay * y + (r * dw - a * r * (dz - dt * dw / 2.0)) / denom
    return float(np.sqrt(np.mean((x - y) ** 2)))
