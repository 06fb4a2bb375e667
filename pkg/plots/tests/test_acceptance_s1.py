"""S1: regenerate every figure type from fixed-seed CSVs produced by the
compute package's CLI, byte-stable across re-renders.

The desk-scale acceptance CSVs are used when the compute suite has already
written them; otherwise small fixed-seed runs are produced here through the
CLI, which is the only coupling between the two packages.
"""

import subprocess
import sys
from pathlib import Path

import pytest

from shearplots.figures import FigureSpec, render

DESK_OUT = Path(__file__).resolve().parents[2] / "out" / "acceptance"

FIGURES = {
    "trace": "trace.csv",
    "variance": "variance.csv",
    "histogram": "histogram.csv",
    "delta-scaling": "sweep_delta.csv",
    "alpha-scaling": "sweep_alpha.csv",
    "correlation-length": "sweep_alpha.csv",
}


def _cli(args, cwd):
    cmd = [sys.executable, "-m", "shearfront.cli"] + [str(a) for a in args]
    proc = subprocess.run(cmd, capture_output=True, text=True, cwd=cwd)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def csv_dir(tmp_path_factory):
    if all((DESK_OUT / name).exists() for name in set(FIGURES.values())):
        return DESK_OUT
    out = tmp_path_factory.mktemp("csvs")
    _cli(["mu", "--lambda", "0.5", "--delta", "1", "--alpha", "4", "--horizon", "50",
          "--trace", "--seed", "3", "--out", out], cwd=out)
    (out / "mu_trace.csv").rename(out / "trace.csv")
    _cli(["mu", "--lambda", "1", "--delta", "2", "--alpha", "4",
          "--estimator", "ensemble", "--n-paths", "100", "--horizon", "100",
          "--variance-checkpoints", "25,50,100", "--snapshot-times", "25,100",
          "--seed", "3", "--out", out], cwd=out)
    _cli(["sweep", "--axis", "delta", "--grid", "0.25,0.5,1", "--alpha", "4",
          "--seed", "5", "--n-paths", "2", "--horizon", "40", "--out", out], cwd=out)
    (out / "sweep.csv").rename(out / "sweep_delta.csv")
    _cli(["sweep", "--axis", "alpha", "--grid", "1,4,16", "--delta", "1",
          "--seed", "5", "--n-paths", "2", "--horizon", "40", "--out", out], cwd=out)
    (out / "sweep.csv").rename(out / "sweep_alpha.csv")
    return out


@pytest.mark.parametrize("figure_id", sorted(FIGURES))
def test_figure_renders_and_is_byte_stable(figure_id, csv_dir, tmp_path):
    csv_in = csv_dir / FIGURES[figure_id]
    first = render(FigureSpec(figure_id, (str(csv_in),), str(tmp_path / "a.png")))
    second = render(FigureSpec(figure_id, (str(csv_in),), str(tmp_path / "b.png")))
    assert first.stat().st_size > 0
    assert first.read_bytes() == second.read_bytes()
