"""Crank-Nicolson evolution of phi_t = 1/2 phi_yy - lam b(y,t) phi, phi(.,0) = 1.

Periodic grid on [0, 1), adaptive time step limited by the implicit
reaction bound dt < 2/max|f| and by the temporal resolution 0.5/a of the
shear, overflow-safe through L1 renormalization with an accumulated log
factor.  Composable single operations (cn_step, choose_dt, renormalize)
share their numerics with the fused kernel behind evolve().
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .ou import OUPath, generate_path
from .seeding import TERM_STREAM, derive_seed
from .shear import ShearFieldSpec, eval_profile, sup_norm

__all__ = [
    "SolverError",
    "PositivityViolation",
    "SingularSystem",
    "ZeroMass",
    "DtUnderflow",
    "GridState",
    "SolverConfig",
    "cn_step",
    "choose_dt",
    "renormalize",
    "evolve",
    "evolve_with_paths",
    "write_trace",
]


class SolverError(RuntimeError):
    pass


class PositivityViolation(SolverError):
    """A Crank-Nicolson step produced a negative value; retry with dt/2."""


class SingularSystem(SolverError):
    """Pivot underflow in the cyclic tridiagonal solve."""


class ZeroMass(SolverError):
    """The discrete L1 norm underflowed to zero."""


class DtUnderflow(SolverError):
    """Even one fine step violates the reaction bound; needs a smaller dt_fine."""


_STATUS_ERRORS = {
    kernels.SINGULAR: SingularSystem,
    kernels.ZERO_MASS: ZeroMass,
    kernels.HALVING_LIMIT: PositivityViolation,
    kernels.DT_UNDERFLOW: DtUnderflow,
}


@dataclass(frozen=True)
class GridState:
    """phi values on the periodic grid plus the accumulated log of stripped mass."""

    values: np.ndarray
    log_norm: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def dy(self) -> float:
        return 1.0 / self.values.shape[0]

    @property
    def l1(self) -> float:
        return float(self.dy * np.sum(np.abs(self.values)))

    @property
    def log_l1(self) -> float:
        return self.log_norm + math.log(self.l1)

    @classmethod
    def uniform(cls, m: int) -> "GridState":
        return cls(values=np.ones(m))


@dataclass(frozen=True)
class SolverConfig:
    dy: float = 0.01
    dt_cap: float = 0.1
    safety: float = 0.5
    renorm_threshold: float = 1e3

    def __post_init__(self):
        m = round(1.0 / self.dy)
        if m < 3 or abs(m * self.dy - 1.0) > 1e-9:
            raise ValueError(f"dy={self.dy} must divide the unit period into >= 3 cells")
        if not (self.dt_cap > 0):
            raise ValueError(f"dt_cap must be positive, got {self.dt_cap}")
        if not (0.0 < self.safety < 1.0):
            raise ValueError(f"safety must lie in (0, 1), got {self.safety}")
        if not (self.renorm_threshold > 1.0):
            raise ValueError(f"renorm_threshold must exceed 1, got {self.renorm_threshold}")

    @property
    def m(self) -> int:
        return round(1.0 / self.dy)

    @property
    def band(self) -> tuple[float, float]:
        return 1.0 / self.renorm_threshold, self.renorm_threshold

    def dt_fine(self, a_max: float) -> float:
        """Fine grid step: a tenth of the cap and of the 0.5/a resolution bound."""
        return min(0.1 * self.dt_cap, 0.05 / a_max)


def cn_step(state: GridState, f_now: np.ndarray, f_next: np.ndarray, dt: float) -> GridState:
    """One Crank-Nicolson step with reaction f frozen at the two time levels.

    Caller guarantees dt <= safety * 2 / max|f_next|.  Raises
    PositivityViolation when the output dips negative (retry with dt/2) and
    SingularSystem on pivot underflow.
    """
    v = state.values
    m = v.shape[0]
    f_now = np.asarray(f_now, dtype=float)
    f_next = np.asarray(f_next, dtype=float)
    if f_now.shape != (m,) or f_next.shape != (m,):
        raise ValueError("reaction arrays must match the grid size")
    out = np.empty(m)
    work = [np.empty(m) for _ in range(4)]
    status = kernels.cn_apply(v, f_now, f_next, float(dt), state.dy, out, *work)
    if status == kernels.SINGULAR or not np.all(np.isfinite(out)):
        raise SingularSystem(f"cyclic solve pivot underflow at t={state.t}")
    # dips within the roundoff floor of the peak are clamped, real
    # overshoots are the caller's cue to retry with dt/2
    floor = -kernels.NEG_REL_FLOOR * max(float(out.max()), 0.0)
    if np.any(out < floor):
        raise PositivityViolation(f"negative value {out.min():.3e} at t={state.t}, dt={dt}")
    np.maximum(out, 0.0, out=out)
    return GridState(values=out, log_norm=state.log_norm, t=state.t + dt)


def choose_dt(f_next_bound: float, alpha: float, config: SolverConfig, dt_fine: float) -> float:
    """Largest multiple of dt_fine within the cap, resolution and reaction bounds.

    Returns at least one dt_fine for the cap-type bounds; raises DtUnderflow
    when a single fine step already violates the reaction bound.
    """
    if dt_fine <= 0 or alpha <= 0 or f_next_bound < 0:
        raise ValueError("choose_dt needs positive dt_fine, alpha and f_next_bound >= 0")
    cap = min(config.dt_cap, 0.5 / alpha)
    m = max(1, int(math.floor(cap / dt_fine + 1e-9)))
    if f_next_bound > 0:
        m_rx = int(math.floor(2.0 * config.safety / (f_next_bound * dt_fine) + 1e-9))
        if m_rx < 1:
            raise DtUnderflow(
                f"reaction bound {2 * config.safety / f_next_bound:.3e} below dt_fine {dt_fine:.3e}")
        m = min(m, m_rx)
    return m * dt_fine


def renormalize(state: GridState) -> GridState:
    """Rescale to unit discrete L1 norm, moving the stripped factor into log_norm."""
    l1 = state.l1
    if not (l1 > 0.0 and math.isfinite(l1)):
        raise ZeroMass(f"L1 norm {l1} at t={state.t}")
    return GridState(values=state.values / l1, log_norm=state.log_norm + math.log(l1), t=state.t)


def _has_reaction(spec: ShearFieldSpec, lam: float) -> bool:
    # lam * delta = 0 kills the reaction identically; phi stays exactly 1
    return lam != 0.0 and spec.delta != 0.0


def _grid(m: int) -> np.ndarray:
    return np.arange(m) / m


def _snap_samples(sample_times, dt_fine: float, horizon: float) -> np.ndarray:
    """Snap requested times to fine-grid indices in (0, horizon]."""
    n_h = int(math.ceil(horizon / dt_fine - 1e-12))
    idx = sorted({min(max(int(round(t / dt_fine)), 0), n_h) for t in sample_times})
    return np.asarray(idx, dtype=np.int64)


def evolve_with_paths(spec: ShearFieldSpec, lam: float, paths: list[OUPath],
                      config: SolverConfig, sample_times) -> np.ndarray:
    """Evolve against explicit per-term OU paths; returns (t, log L1) rows.

    The temporal factor at a PDE node is the fine-grid sample at that node;
    steps are forced onto the fine grid so no interpolation error enters.
    """
    if len(paths) != len(spec.terms):
        raise ValueError(f"need one path per term, got {len(paths)} for {len(spec.terms)}")
    dt_fine = paths[0].dt_fine
    if any(abs(p.dt_fine - dt_fine) > 1e-15 for p in paths):
        raise ValueError("all term paths must share one fine grid")
    horizon = min(p.horizon for p in paths)
    sample_idx = _snap_samples(sample_times, dt_fine, horizon)
    times = sample_idx * dt_fine
    if not _has_reaction(spec, lam):
        # phi = 1 is an exact fixed point of cn_step when f vanishes
        return np.column_stack([times, np.zeros(times.shape[0])])

    m = config.m
    grid = _grid(m)
    b1 = np.ascontiguousarray([eval_profile(p, grid) for p, _ in spec.terms], dtype=float)
    n_fine = int(math.ceil(horizon / dt_fine - 1e-12))
    b2 = np.ascontiguousarray([p.samples[:n_fine + 1] for p in paths], dtype=float)

    positive_idx = sample_idx[sample_idx > 0]
    out = np.empty(positive_idx.shape[0])
    counters = np.zeros(3, dtype=np.int64)
    k_cap = max(1, int(math.floor(min(config.dt_cap, 0.5 / spec.a_max) / dt_fine + 1e-9)))
    band_lo, band_hi = config.band
    if np.all(b1 == b1[:, :1]):
        # b(y, t) = b(t): the solution stays exactly y-independent, so step
        # the scalar CN recursion.  Scalar steps cost next to nothing, so
        # they run on the fine grid itself (k_cap=1), well inside every
        # stability cap.
        status = kernels.evolve_scalar_kernel(
            np.ascontiguousarray(b1[:, 0]), b2, lam * spec.delta, dt_fine, 1,
            config.safety, band_lo, band_hi, positive_idx, out, counters)
    else:
        status = kernels.evolve_kernel(b1, b2, lam * spec.delta, dt_fine, k_cap,
                                       config.safety, config.dy, band_lo, band_hi,
                                       positive_idx, out, counters)
    if status != kernels.OK:
        raise _STATUS_ERRORS[status](f"evolution failed with status {status} (lam={lam})")
    logs = np.concatenate([np.zeros(sample_idx.shape[0] - positive_idx.shape[0]), out])
    return np.column_stack([times, logs])


def _frozen_paths(spec: ShearFieldSpec, horizon: float, dt_fine: float) -> list[OUPath]:
    n = int(math.ceil(horizon / dt_fine - 1e-12))
    ones = np.ones(n + 1)
    return [OUPath(params=ou, dt_fine=dt_fine, samples=ones, seed=0) for _, ou in spec.terms]


def _paths_for_seed(spec: ShearFieldSpec, horizon: float, dt_fine: float, seed: int) -> list[OUPath]:
    if spec.frozen:
        return _frozen_paths(spec, horizon, dt_fine)
    if len(spec.terms) == 1:
        return [generate_path(spec.ou, horizon, dt_fine, seed)]
    return [generate_path(ou, horizon, dt_fine, derive_seed(seed, TERM_STREAM, j))
            for j, (_, ou) in enumerate(spec.terms)]


def evolve(spec: ShearFieldSpec, lam: float, horizon: float, seed: int,
           config: SolverConfig, sample_times) -> np.ndarray:
    """Evolve from phi = 1, regenerating the OU path(s) from the seed.

    When the fixed fine grid cannot honor the reaction bound for this
    realization the path is regenerated on a halved fine grid (changing the
    draws but staying deterministic in the seed).
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not _has_reaction(spec, lam):
        dt_fine = config.dt_fine(spec.a_max)
        idx = _snap_samples(sample_times, dt_fine, horizon)
        return np.column_stack([idx * dt_fine, np.zeros(idx.shape[0])])

    dt_fine = config.dt_fine(spec.a_max)
    sup_total = sum(sup_norm(p) for p, _ in spec.terms)
    for _ in range(60):
        paths = _paths_for_seed(spec, horizon, dt_fine, seed)
        # conservative whole-path reaction bound; shrink dt_fine up front
        # instead of failing mid-run
        fmax = abs(lam) * spec.delta * sup_total * max(
            float(np.max(np.abs(p.samples))) for p in paths)
        if fmax * dt_fine <= 2.0 * config.safety:
            return evolve_with_paths(spec, lam, paths, config, sample_times)
        dt_fine *= 0.5
    raise DtUnderflow(f"no feasible fine step for lam={lam}, delta={spec.delta}")


def write_trace(series: np.ndarray, path) -> None:
    """Write a (t, log L1) series as CSV with columns t,log_l1."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "log_l1"])
        for t, v in series:
            writer.writerow([repr(float(t)), repr(float(v))])
