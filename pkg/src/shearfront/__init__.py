"""Front speeds of KPP reaction-diffusion waves in temporally random shear flows.

The front speed is computed from the variational formula

    c* = inf_{lam > 0} mu(lam) / lam,

where mu(lam) = f'(0) + lam^2/2 + rho(lam) and rho(lam) is the almost-sure
growth rate of the tilted heat equation

    phi_t = 1/2 phi_yy - lam * b(y, t) * phi,   phi(y, 0) = 1,

on the periodic cross-section y in [0, 1).  The shear b(y, t) is a separable
field delta * b1(y) * b2(t) with b2 a stationary Ornstein-Uhlenbeck process.
"""

from .shear import OUParams, ShearFieldSpec, ShearProfile, eval_profile, p1_constant, sup_norm
from .ou import OUPath, generate_path
from .pde import GridState, SolverConfig, evolve
from .lyapunov import LyapunovEstimate, mu_ensemble, mu_single_path, steady_shear_rho_oracle
from .speed import SpeedResult, cstar, cstar_homogeneous
from .bounds import BoundsReport, bound_linear, bound_quadratic, check_bounds
from .sweeps import SweepPlan, SweepRow, fit_loglog_slope, run_sweep

__version__ = "0.1.0"

__all__ = [
    "OUParams",
    "OUPath",
    "ShearFieldSpec",
    "ShearProfile",
    "GridState",
    "SolverConfig",
    "LyapunovEstimate",
    "SpeedResult",
    "BoundsReport",
    "SweepPlan",
    "SweepRow",
    "eval_profile",
    "sup_norm",
    "p1_constant",
    "generate_path",
    "evolve",
    "mu_single_path",
    "mu_ensemble",
    "steady_shear_rho_oracle",
    "cstar",
    "cstar_homogeneous",
    "bound_linear",
    "bound_quadratic",
    "check_bounds",
    "fit_loglog_slope",
    "run_sweep",
    "__version__",
]
