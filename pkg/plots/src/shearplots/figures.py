"""Figure rendering from shearfront CSV outputs.

Consumes only the CSV files of the compute package (no in-process
coupling) and regenerates the publication-style views: convergence traces,
variance decay, distribution snapshots, amplitude and correlation-rate
scaling, and the correlation-length resonance curve.  Output images carry
no timestamps so re-rendering identical input is byte-stable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["FigureSpec", "SchemaError", "FIGURE_IDS", "render"]

FIGURE_IDS = ("trace", "variance", "histogram", "delta-scaling", "alpha-scaling",
              "correlation-length")

_SCHEMAS = {
    "trace": ["lambda", "t", "mu_t"],
    "variance": ["t", "var_mu"],
    "histogram": ["t", "bin_lo", "bin_hi", "count"],
    "sweep": ["param", "c_star", "enhancement", "stderr", "c0", "bound_lin",
              "bound_quad", "lambda_star", "n_paths", "horizon", "seed"],
}

_DEFAULT_GUIDES = {
    "delta-scaling": (2.0, 1.0),
    "alpha-scaling": (0.5,),
}


class SchemaError(ValueError):
    """Input CSV does not match the declared column schema."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    inputs: tuple[str, ...]
    output: str
    loglog: bool = False
    guide_slopes: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}; "
                             f"expected one of {', '.join(FIGURE_IDS)}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
        if not self.guide_slopes:
            object.__setattr__(self, "guide_slopes",
                               _DEFAULT_GUIDES.get(self.figure_id, ()))


def _read_csv(path: str, schema_key: str) -> dict[str, np.ndarray]:
    schema = _SCHEMAS[schema_key]
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"input file {path} does not exist")
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty")
        for col in schema:
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=object)
    out = {}
    for col in schema:
        idx = header.index(col)
        out[col] = np.asarray([float(v) for v in data[:, idx]])
    return out


def _guide_lines(ax, x, y, slopes):
    """Reference power-law lines anchored at the data's lower-left corner."""
    x0 = float(np.min(x))
    y0 = float(np.min(y)) if float(np.min(y)) > 0 else 1e-12
    xs = np.array([x0, float(np.max(x))])
    for slope in slopes:
        ax.plot(xs, 0.5 * y0 * (xs / x0) ** slope, "k-", linewidth=0.8,
                label=f"slope p={slope:g}")


def _fig_trace(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for path in spec.inputs:
        data = _read_csv(path, "trace")
        for lam in np.unique(data["lambda"]):
            mask = data["lambda"] == lam
            ax.plot(data["t"][mask], data["mu_t"][mask], label=f"lambda={lam:g}")
    ax.set_xlabel("time t")
    ax.set_ylabel("running estimate mu_t")
    ax.set_title("Convergence of the growth-rate estimate")
    ax.legend(loc="best", fontsize=8)
    return fig


def _fig_variance(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for path in spec.inputs:
        data = _read_csv(path, "variance")
        ax.loglog(data["t"], data["var_mu"], "o-", label=Path(path).stem)
        _guide_lines(ax, data["t"], data["var_mu"], spec.guide_slopes or (-1.0,))
    ax.set_xlabel("time t")
    ax.set_ylabel("Var[mu_t] across realizations")
    ax.set_title("Variance decay of the running estimate")
    ax.legend(loc="best", fontsize=8)
    return fig


def _fig_histogram(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    data = _read_csv(spec.inputs[0], "histogram")
    for t in np.unique(data["t"]):
        mask = data["t"] == t
        centers = 0.5 * (data["bin_lo"][mask] + data["bin_hi"][mask])
        ax.step(centers, data["count"][mask], where="mid", label=f"t={t:g}")
    ax.set_xlabel("running estimate mu_t")
    ax.set_ylabel("realization count")
    ax.set_title("Distribution of the growth-rate estimate over time")
    ax.legend(loc="best", fontsize=8)
    return fig


def _fig_sweep_scaling(spec: FigureSpec, xlabel: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for path in spec.inputs:
        data = _read_csv(path, "sweep")
        pos = data["enhancement"] > 0
        x, y = data["param"][pos], data["enhancement"][pos]
        ax.loglog(x, y, "o-", label="c* - c*(0)")
        ax.loglog(data["param"], data["bound_lin"] - data["c0"], "s--",
                  linewidth=0.9, label="linear bound g1 - c*(0)")
        ax.loglog(data["param"], data["bound_quad"] - data["c0"], "d--",
                  linewidth=0.9, label="quadratic bound g2 - c*(0)")
        if pos.any():
            _guide_lines(ax, x, y, spec.guide_slopes)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("speed enhancement c* - c*(0)")
    ax.set_title(f"Front-speed enhancement vs {xlabel}")
    ax.legend(loc="best", fontsize=8)
    return fig


def _fig_correlation_length(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for path in spec.inputs:
        data = _read_csv(path, "sweep")
        order = np.argsort(1.0 / data["param"])
        ax.semilogx((1.0 / data["param"])[order], data["c_star"][order], "o-")
    ax.set_xlabel("correlation length 1/alpha")
    ax.set_ylabel("front speed c*")
    ax.set_title("Speed dependence on the temporal correlation length")
    return fig


def render(spec: FigureSpec) -> Path:
    """Render the figure and return the written path.

    The output is produced only after every input is schema-validated, so a
    bad input never leaves a partial image behind.
    """
    builders = {
        "trace": _fig_trace,
        "variance": _fig_variance,
        "histogram": _fig_histogram,
        "delta-scaling": lambda s: _fig_sweep_scaling(s, "shear amplitude delta"),
        "alpha-scaling": lambda s: _fig_sweep_scaling(s, "covariance rate alpha"),
        "correlation-length": _fig_correlation_length,
    }
    fig = builders[spec.figure_id](spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        # empty metadata keeps the PNG free of software/version strings,
        # making re-renders byte-identical
        fig.savefig(out, dpi=120, metadata={})
    finally:
        plt.close(fig)
    return out
