"""Separable random shear field b(y, t) = delta * b1(y) * b2(t).

The spatial profile b1 is deterministic, 1-periodic and unit-normalized;
the amplitude delta is stored separately so that sup-norm based bound
formulas never double-count it.  The temporal factor b2 is a stationary
Ornstein-Uhlenbeck process described here only through its parameters;
realizations live in :mod:`shearfront.ou`.

Multi-term fields sum(b1_j(y) * b2_j(t)) sharing one delta are supported as
a tuple of (profile, params) terms; all derived quantities sum term-wise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ShearProfile",
    "OUParams",
    "ShearFieldSpec",
    "eval_profile",
    "sup_norm",
    "p1_constant",
    "field_value",
]


@dataclass(frozen=True)
class ShearProfile:
    """Dimensionless velocity profile b1(y) on the unit period.

    kind "sine" is sin(2*pi*k*y) with integer wavenumber k (cycles per
    period); kind "table" holds periodic samples at y_i = i/n, evaluated by
    linear interpolation with wraparound.
    """

    kind: str
    k: int = 1
    samples: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "sine":
            if not isinstance(self.k, int) or self.k == 0:
                raise ValueError(f"sine profile needs a nonzero integer wavenumber, got k={self.k!r}")
        elif self.kind == "table":
            if self.samples is None or len(self.samples) < 8:
                n = 0 if self.samples is None else len(self.samples)
                raise ValueError(f"tabulated profile needs >= 8 samples, got {n}")
            if not all(math.isfinite(s) for s in self.samples):
                raise ValueError("tabulated profile has non-finite samples")
            object.__setattr__(self, "samples", tuple(float(s) for s in self.samples))
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def sine(cls, k: int = 3) -> "ShearProfile":
        return cls(kind="sine", k=k)

    @classmethod
    def table(cls, values) -> "ShearProfile":
        return cls(kind="table", samples=tuple(float(v) for v in values))

    @classmethod
    def uniform(cls) -> "ShearProfile":
        """Spatially constant profile b1(y) = 1 (the no-enhancement case)."""
        return cls(kind="table", samples=(1.0,) * 8)


def eval_profile(profile: ShearProfile, y):
    """Evaluate b1 at position(s) y >= 0 with exact 1-periodic reduction."""
    y = np.asarray(y, dtype=float)
    # reduce first so that y and y + 1 give bit-identical results
    yr = y - np.floor(y)
    if profile.kind == "sine":
        out = np.sin((2.0 * np.pi * profile.k) * yr)
    else:
        s = np.asarray(profile.samples, dtype=float)
        n = s.shape[0]
        pos = yr * n
        i = np.floor(pos).astype(np.int64) % n
        w = pos - np.floor(pos)
        out = s[i] * (1.0 - w) + s[(i + 1) % n] * w
    return out if out.ndim else float(out)


def sup_norm(profile: ShearProfile) -> float:
    """Sup norm of b1; exact for the analytic sine, max |sample| for tables."""
    if profile.kind == "sine":
        return 1.0
    return float(np.max(np.abs(profile.samples)))


@dataclass(frozen=True)
class OUParams:
    """Ornstein-Uhlenbeck drift rate a > 0 and noise intensity r >= 0.

    The stationary law is N(0, r^2 / (2a)).  The covariance-normalized
    parametrization a = alpha, r = sqrt(2) * alpha^(3/4) keeps the L2 norm of
    the covariance sqrt(alpha) * exp(-alpha |t - s|) independent of alpha.
    """

    a: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"OU drift rate must be positive, got a={self.a}")
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"OU noise intensity must be >= 0, got r={self.r}")

    @classmethod
    def from_alpha(cls, alpha: float) -> "OUParams":
        if not (math.isfinite(alpha) and alpha > 0):
            raise ValueError(f"alpha must be positive, got {alpha}")
        return cls(a=float(alpha), r=math.sqrt(2.0) * float(alpha) ** 0.75)

    @property
    def stationary_variance(self) -> float:
        return self.r * self.r / (2.0 * self.a)

    @property
    def stationary_std(self) -> float:
        return math.sqrt(self.stationary_variance)


@dataclass(frozen=True)
class ShearFieldSpec:
    """Shear field delta * sum_j b1_j(y) * b2_j(t).

    With frozen=True every temporal factor is pinned to the constant 1,
    which turns the field into a steady shear; this is the coupling used by
    eigenvalue-oracle checks.
    """

    terms: tuple[tuple[ShearProfile, OUParams], ...]
    delta: float
    frozen: bool = field(default=False)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("shear field needs at least one (profile, params) term")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise ValueError(f"amplitude delta must be >= 0, got {self.delta}")
        object.__setattr__(self, "terms", tuple((p, q) for p, q in self.terms))

    @classmethod
    def single(cls, profile: ShearProfile, ou: OUParams, delta: float,
               frozen: bool = False) -> "ShearFieldSpec":
        return cls(terms=((profile, ou),), delta=float(delta), frozen=frozen)

    @property
    def profile(self) -> ShearProfile:
        return self.terms[0][0]

    @property
    def ou(self) -> OUParams:
        return self.terms[0][1]

    @property
    def a_max(self) -> float:
        """Fastest OU rate across terms; sets the temporal resolution."""
        return max(ou.a for _, ou in self.terms)


def p1_constant(spec: ShearFieldSpec) -> float:
    """Integrated covariance bound p1 of the unit-amplitude field.

    Each term contributes ||b1||_inf^2 * integral_0^inf sigma^2 e^(-a s) ds
    = ||b1||_inf^2 * r^2 / (2 a^2); under the normalized parametrization a
    single term gives alpha^(-1/2) * ||b1||_inf^2.  delta is not included
    here: bound formulas insert delta^2 explicitly.
    """
    total = 0.0
    for profile, ou in spec.terms:
        if ou.a <= 0:
            raise ValueError("p1 requires a positive OU drift rate")
        total += sup_norm(profile) ** 2 * ou.r**2 / (2.0 * ou.a**2)
    return total


def field_value(spec: ShearFieldSpec, y, b2_values) -> float:
    """Field value delta * sum_j b1_j(y) * b2_j at one point.

    b2_values holds one temporal factor per term (all 1.0 when frozen).
    """
    vals = np.atleast_1d(np.asarray(b2_values, dtype=float))
    if vals.shape[0] != len(spec.terms):
        raise ValueError(f"need one b2 value per term, got {vals.shape[0]} for {len(spec.terms)} terms")
    acc = 0.0
    for (profile, _), b2 in zip(spec.terms, vals):
        acc += eval_profile(profile, y) * b2
    return spec.delta * acc
