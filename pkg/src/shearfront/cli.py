"""Command-line entry point: flat key=value config, subcommands, CSV emission.

Subcommands: mu (Lyapunov exponent estimate), speed (front speed), sweep
(parameter sweeps with slope fits), validate (one-shot acceptance runner).
Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .lyapunov import (KPPNonlinearity, mu_distribution_snapshot, mu_ensemble,
                       mu_single_path, steady_shear_rho_oracle,
                       variance_decay_diagnostic, write_histogram,
                       write_mu_summary, write_mu_trace, write_variance_table)
from .pde import SolverConfig, SolverError
from .shear import OUParams, ShearFieldSpec, ShearProfile
from .speed import cstar
from .sweeps import SweepPlan, fit_loglog_slope, run_sweep, write_sweep_csv

__all__ = ["RunConfig", "ConfigError", "main"]

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Flat run configuration; file keys and CLI flags map 1:1 to fields."""

    profile: str = "sine"
    k: int = 3
    values: str = ""           # comma-separated samples for profile = table
    delta: float = 1.0
    alpha: float = 1.0
    a: float = 0.0             # direct OU parameters; override alpha when both given
    r: float = -1.0
    frozen: bool = False
    uniform_shear: bool = False
    fprime0: float = 1.0
    lam: float = 1.0
    estimator: str = "single"
    n_paths: int = 20
    horizon: float = 2000.0
    seed: int = 0
    lambda_tol: float = 1e-3
    dy: float = 0.01
    dt_cap: float = 0.1
    safety: float = 0.5
    renorm_threshold: float = 1e3
    axis: str = "delta"
    grid: str = ""
    fixed: float = 1.0
    fit_small: str = ""        # e.g. "0.25,2" for a log-log slope fit range
    fit_large: str = ""
    variance_checkpoints: str = ""
    snapshot_times: str = ""
    trace: bool = False
    jobs: int = 1
    out: str = "out"
    paper_scale: bool = False
    quick: bool = False

    _BOOL_FIELDS = ("frozen", "uniform_shear", "trace", "paper_scale", "quick")

    def validate(self) -> None:
        if self.profile not in ("sine", "table"):
            raise ConfigError(f"profile must be 'sine' or 'table', got {self.profile!r}")
        if self.alpha <= 0 and self.a <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if self.delta < 0:
            raise ConfigError(f"delta must be >= 0, got {self.delta}")
        try:
            KPPNonlinearity(self.fprime0)
        except ValueError:
            raise ConfigError(f"fprime0 must be positive, got {self.fprime0}") from None
        if self.horizon <= 0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if self.estimator not in ("single", "ensemble"):
            raise ConfigError(f"estimator must be 'single' or 'ensemble', got {self.estimator!r}")
        if self.estimator == "ensemble" and self.n_paths < 2:
            raise ConfigError(f"n_paths must be >= 2 for the ensemble estimator, got {self.n_paths}")
        if self.axis not in ("delta", "alpha"):
            raise ConfigError(f"axis must be 'delta' or 'alpha', got {self.axis!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        # construction of these performs the remaining numeric validation
        try:
            self.solver_config()
            self.shear_spec()
        except (ValueError, ConfigError) as exc:
            raise ConfigError(str(exc)) from None

    def solver_config(self) -> SolverConfig:
        return SolverConfig(dy=self.dy, dt_cap=self.dt_cap, safety=self.safety,
                            renorm_threshold=self.renorm_threshold)

    def shear_profile(self) -> ShearProfile:
        if self.uniform_shear:
            return ShearProfile.uniform()
        if self.profile == "sine":
            return ShearProfile.sine(self.k)
        try:
            samples = [float(v) for v in self.values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"values must be comma-separated numbers, got {self.values!r}")
        return ShearProfile.table(samples)

    def ou_params(self) -> OUParams:
        if self.a > 0:
            return OUParams(a=self.a, r=self.r if self.r >= 0 else 0.0)
        return OUParams.from_alpha(self.alpha)

    def shear_spec(self) -> ShearFieldSpec:
        return ShearFieldSpec.single(self.shear_profile(), self.ou_params(),
                                     self.delta, frozen=self.frozen)

    def out_dir(self) -> Path:
        path = Path(self.out)
        path.mkdir(parents=True, exist_ok=True)
        return path


def _parse_float_list(text: str, key: str) -> list[float]:
    try:
        items = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{key} must be comma-separated numbers, got {text!r}")
    if not items:
        raise ConfigError(f"{key} is empty")
    return items


def parse_config_file(path: str) -> dict:
    """Parse flat `key = value` lines; unknown keys are hard errors."""
    known = {f.name for f in fields(RunConfig) if not f.name.startswith("_")}
    raw: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = value
    return raw


def _coerce(cfg: RunConfig, key: str, value) -> None:
    ftype = {f.name: f.type for f in fields(RunConfig)}[key]
    if isinstance(value, str):
        try:
            if ftype in ("bool", bool) or key in RunConfig._BOOL_FIELDS:
                value = value.strip().lower() in ("1", "true", "yes", "on")
            elif ftype in ("int", int):
                value = int(value)
            elif ftype in ("float", float):
                value = float(value)
        except ValueError:
            raise ConfigError(f"key {key!r}: cannot parse {value!r}")
    setattr(cfg, key, value)


def build_config(args: argparse.Namespace) -> RunConfig:
    """Per-command defaults, then file values, then CLI flags."""
    cfg = RunConfig()
    if getattr(args, "command", None) in ("speed", "sweep"):
        cfg.estimator = "ensemble"
    if getattr(args, "config", None):
        for key, value in parse_config_file(args.config).items():
            _coerce(cfg, key, value)
    for key in (f.name for f in fields(RunConfig) if not f.name.startswith("_")):
        val = getattr(args, key, None)
        if val is not None:
            _coerce(cfg, key, val)
    if cfg.paper_scale:
        # full-scale figure mode: one long realization per estimate
        cfg.horizon = max(cfg.horizon, 30000.0)
        cfg.estimator = "single"
    cfg.validate()
    return cfg


def _add_common(p: argparse.ArgumentParser, seed_required: bool) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--profile", choices=["sine", "table"])
    p.add_argument("--k", type=int, help="sine wavenumber (cycles per period)")
    p.add_argument("--values", help="comma-separated table profile samples")
    p.add_argument("--uniform-shear", dest="uniform_shear", action="store_const", const=True)
    p.add_argument("--frozen", action="store_const", const=True,
                   help="freeze the temporal factor at 1 (steady shear)")
    p.add_argument("--delta", type=float, help="shear amplitude")
    p.add_argument("--alpha", type=float, help="OU covariance rate (normalized parametrization)")
    p.add_argument("--a", type=float, help="OU drift rate (overrides --alpha)")
    p.add_argument("--r", type=float, help="OU noise intensity (with --a)")
    p.add_argument("--fprime0", type=float, help="KPP linearization f'(0)")
    p.add_argument("--estimator", choices=["single", "ensemble"])
    p.add_argument("--n-paths", dest="n_paths", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--dy", type=float)
    p.add_argument("--dt-cap", dest="dt_cap", type=float)
    p.add_argument("--safety", type=float)
    p.add_argument("--renorm-threshold", dest="renorm_threshold", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="output directory for CSV files")
    p.add_argument("--paper-scale", dest="paper_scale", action="store_const", const=True,
                   help="full-scale single-path mode (horizon >= 30000); no desk gate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shearfront",
                                     description="KPP front speeds in random shear flows")
    sub = parser.add_subparsers(dest="command", required=True)

    p_mu = sub.add_parser("mu", help="estimate the Lyapunov exponent mu(lambda)")
    _add_common(p_mu, seed_required=False)
    p_mu.add_argument("--lambda", dest="lam", type=float, required=True)
    p_mu.add_argument("--trace", action="store_const", const=True,
                      help="write the running-estimate trace CSV")
    p_mu.add_argument("--variance-checkpoints", dest="variance_checkpoints",
                      help="comma-separated times for the variance decay table")
    p_mu.add_argument("--snapshot-times", dest="snapshot_times",
                      help="comma-separated times for distribution histograms")

    p_speed = sub.add_parser("speed", help="compute the front speed c*")
    _add_common(p_speed, seed_required=True)
    p_speed.add_argument("--lambda-tol", dest="lambda_tol", type=float)

    p_sweep = sub.add_parser("sweep", help="sweep delta or alpha and fit slopes")
    _add_common(p_sweep, seed_required=True)
    p_sweep.add_argument("--axis", choices=["delta", "alpha"])
    p_sweep.add_argument("--grid", help="comma-separated strictly increasing grid")
    p_sweep.add_argument("--fixed", type=float, help="value of the non-swept parameter")
    p_sweep.add_argument("--lambda-tol", dest="lambda_tol", type=float)
    p_sweep.add_argument("--fit-small", dest="fit_small", help="param range lo,hi for a slope fit")
    p_sweep.add_argument("--fit-large", dest="fit_large", help="param range lo,hi for a slope fit")

    p_val = sub.add_parser("validate", help="run the acceptance checks")
    _add_common(p_val, seed_required=False)
    p_val.add_argument("--quick", action="store_const", const=True,
                       help="fast subset of the checks")
    return parser


def cmd_mu(cfg: RunConfig) -> int:
    spec = cfg.shear_spec()
    solver = cfg.solver_config()
    out = cfg.out_dir()
    if cfg.estimator == "ensemble":
        est = mu_ensemble(spec, cfg.lam, cfg.fprime0, cfg.horizon, cfg.n_paths,
                          cfg.seed, solver, jobs=cfg.jobs)
    else:
        est = mu_single_path(spec, cfg.lam, cfg.fprime0, cfg.horizon, cfg.seed, solver)
    write_mu_summary([est], out / "mu_summary.csv")
    if cfg.trace:
        write_mu_trace([est], out / "mu_trace.csv")
    if cfg.variance_checkpoints:
        checkpoints = _parse_float_list(cfg.variance_checkpoints, "variance_checkpoints")
        decay = variance_decay_diagnostic(spec, cfg.lam, cfg.fprime0, cfg.horizon,
                                          cfg.n_paths, cfg.seed, checkpoints, solver,
                                          jobs=cfg.jobs)
        write_variance_table(decay, out / "variance.csv")
        print(f"variance decay slope: {decay.slope:.4f}")
    if cfg.snapshot_times:
        times = _parse_float_list(cfg.snapshot_times, "snapshot_times")
        rows = mu_distribution_snapshot(spec, cfg.lam, cfg.fprime0, cfg.horizon,
                                        cfg.n_paths, cfg.seed, times, solver,
                                        jobs=cfg.jobs)
        write_histogram(rows, out / "histogram.csv")
    print(f"lambda={cfg.lam} mu_hat={est.mu_hat!r} rho_hat={est.rho_hat!r} "
          f"stderr={est.stderr!r}")
    if cfg.frozen:
        oracle = steady_shear_rho_oracle(cfg.shear_profile(), cfg.lam * cfg.delta, cfg.dy)
        print(f"steady-shear oracle rho={oracle!r}")
    return EXIT_OK


SPEED_HEADER = ["delta", "alpha", "c_star", "lambda_star", "stderr_c", "horizon",
                "n_paths", "seed", "c0", "bound_lin", "bound_quad", "ok"]


def cmd_speed(cfg: RunConfig) -> int:
    spec = cfg.shear_spec()
    result = cstar(spec, cfg.fprime0, estimator=cfg.estimator, n_paths=cfg.n_paths,
                   horizon=cfg.horizon, master_seed=cfg.seed, lambda_tol=cfg.lambda_tol,
                   config=cfg.solver_config(), jobs=cfg.jobs)
    rep = result.bounds_report
    out = cfg.out_dir()
    with open(out / "speed.csv", "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SPEED_HEADER)
        writer.writerow([repr(float(cfg.delta)), repr(float(spec.ou.a)),
                         repr(result.c_star), repr(result.lambda_star),
                         repr(result.stderr_c), repr(result.horizon), result.n_paths,
                         cfg.seed, repr(rep.c0), repr(rep.linear_bound),
                         repr(rep.quadratic_bound), int(rep.ok)])
    print(f"c_star={result.c_star!r} lambda_star={result.lambda_star!r} "
          f"stderr_c={result.stderr_c!r} bounds_ok={rep.ok}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    grid = _parse_float_list(cfg.grid, "grid")
    try:
        plan = SweepPlan(axis=cfg.axis, grid=tuple(grid), fixed=cfg.fixed,
                         horizon=cfg.horizon, n_paths=cfg.n_paths, master_seed=cfg.seed,
                         estimator=cfg.estimator, lambda_tol=cfg.lambda_tol)
    except ValueError as exc:
        raise ConfigError(str(exc))
    base = cfg.shear_spec()
    rows = run_sweep(plan, base, cfg.fprime0, cfg.solver_config(), jobs=cfg.jobs)
    out = cfg.out_dir()
    write_sweep_csv(rows, out / "sweep.csv")
    for row in rows:
        print(f"{plan.axis}={row.param} c_star={row.c_star!r} enhancement={row.enhancement!r}")
    fits = []
    for label, text in (("small", cfg.fit_small), ("large", cfg.fit_large)):
        if not text:
            continue
        lo, hi = _parse_float_list(text, f"fit_{label}")[:2]
        fit = fit_loglog_slope(rows, (lo, hi))
        fits.append((label, lo, hi, fit))
        print(f"{label} range [{lo}, {hi}]: slope={fit.slope:.4f} +/- {fit.half_width:.4f} "
              f"(n={fit.n_points})")
    if fits:
        with open(out / "slopes.csv", "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["range_lo", "range_hi", "slope", "half_width", "n_points"])
            for _, lo, hi, fit in fits:
                writer.writerow([repr(float(lo)), repr(float(hi)), repr(fit.slope),
                                 repr(fit.half_width), fit.n_points])
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    from .acceptance import run_all

    results = run_all(quick=cfg.quick, jobs=cfg.jobs, out_dir=cfg.out_dir())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler = {"mu": cmd_mu, "speed": cmd_speed, "sweep": cmd_sweep,
               "validate": cmd_validate}[args.command]
    try:
        return handler(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
