"""Analytic bounds on the front speed and advisory checks against them.

All bounds are exact closed forms of the field parameters: the Gaussian
stationary law makes E|b2| available without sampling, which keeps the
checks sharp.  Violations are reported, never raised; finite-horizon
estimates fluctuate around limits that only hold almost surely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .shear import OUParams, ShearFieldSpec, p1_constant, sup_norm

__all__ = [
    "BoundsReport",
    "e_abs_b2",
    "bound_linear",
    "bound_quadratic",
    "check_bounds",
]


def e_abs_b2(ou: OUParams) -> float:
    """E|b2| for the stationary Gaussian law: sigma * sqrt(2/pi)."""
    return ou.stationary_std * math.sqrt(2.0 / math.pi)


def bound_linear(spec: ShearFieldSpec, fprime0: float) -> float:
    """Linear upper bound c*(0) + delta * sum_j ||b1_j||_inf E|b2_j|.

    Under the normalized parametrization sigma = alpha^(1/4), so a single
    term reads c*(0) + delta * alpha^(1/4) * ||b1||_inf * sqrt(2/pi).
    """
    c0 = math.sqrt(2.0 * fprime0)
    return c0 + spec.delta * sum(sup_norm(p) * e_abs_b2(ou) for p, ou in spec.terms)


def bound_quadratic(spec: ShearFieldSpec, fprime0: float) -> float:
    """Quadratic upper bound c*(0) * sqrt(1 + delta^2 p1)."""
    c0 = math.sqrt(2.0 * fprime0)
    return c0 * math.sqrt(1.0 + spec.delta**2 * p1_constant(spec))


@dataclass(frozen=True)
class BoundsReport:
    c0: float
    linear_bound: float
    quadratic_bound: float
    quadratic_small_delta: float  # c0 (1 + delta^2 p1 / 2), the small-delta expansion
    lower_ok: bool
    upper_ok: bool
    lower_slack: float  # c_star - (c0 - 3 sigma_c); >= 0 when satisfied
    upper_slack: float  # min(linear, quadratic) + 3 sigma_c - c_star
    sigma_c: float

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def check_bounds(c_star: float, sigma_c: float, spec: ShearFieldSpec,
                 fprime0: float) -> BoundsReport:
    """Check a computed speed against the bounds at the 3-sigma advisory level.

    A small numerical floor (1e-6 relative) covers the minimization
    overshoot induced by the finite lambda tolerance; without it a delta=0
    run, where the upper bounds equal c*(0) exactly and sigma_c is 0, would
    flag its own nanoscale bracketing error.
    """
    c0 = math.sqrt(2.0 * fprime0)
    lin = bound_linear(spec, fprime0)
    quad = bound_quadratic(spec, fprime0)
    small = c0 * (1.0 + 0.5 * spec.delta**2 * p1_constant(spec))
    num_floor = 1e-6 * c0
    lower_slack = c_star - (c0 - 3.0 * sigma_c - num_floor)
    upper_slack = min(lin, quad) + 3.0 * sigma_c + num_floor - c_star
    return BoundsReport(
        c0=c0, linear_bound=lin, quadratic_bound=quad, quadratic_small_delta=small,
        lower_ok=lower_slack >= 0.0, upper_ok=upper_slack >= 0.0,
        lower_slack=lower_slack, upper_slack=upper_slack, sigma_c=sigma_c)
