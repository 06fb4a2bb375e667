import csv
import math

import numpy as np
import pytest

from shearfront.bounds import check_bounds
from shearfront.shear import OUParams, ShearFieldSpec, ShearProfile
from shearfront.sweeps import (SWEEP_HEADER, InsufficientPoints, SlopeFit, SweepPlan,
                               SweepRow, _spec_at, fit_loglog_slope, run_sweep,
                               write_sweep_csv)


def base_spec(alpha=16.0, delta=1.0):
    return ShearFieldSpec.single(ShearProfile.sine(3), OUParams.from_alpha(alpha), delta)


def synthetic_rows(params, enhancements):
    return [SweepRow(param=p, c_star=math.sqrt(2) + e, enhancement=e, stderr=0.0,
                     c0=math.sqrt(2), bound_lin=0.0, bound_quad=0.0, lambda_star=1.0,
                     n_paths=1, horizon=1.0, seed=0)
            for p, e in zip(params, enhancements)]


class TestSweepPlan:
    def test_non_monotone_grid_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            SweepPlan(axis="delta", grid=(1.0, 0.5), fixed=16.0)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            SweepPlan(axis="delta", grid=(), fixed=16.0)

    def test_alpha_grid_must_be_positive(self):
        with pytest.raises(ValueError, match="positive"):
            SweepPlan(axis="alpha", grid=(0.0, 1.0), fixed=2.0)

    def test_delta_zero_allowed(self):
        plan = SweepPlan(axis="delta", grid=(0.0,), fixed=16.0)
        assert plan.grid == (0.0,)

    def test_bad_axis(self):
        with pytest.raises(ValueError, match="axis"):
            SweepPlan(axis="beta", grid=(1.0,), fixed=1.0)


class TestSpecAt:
    def test_delta_axis_replaces_amplitude(self):
        plan = SweepPlan(axis="delta", grid=(1.0,), fixed=16.0)
        spec = _spec_at(plan, base_spec(delta=5.0), 3.0)
        assert spec.delta == 3.0
        assert spec.ou.a == 16.0

    def test_alpha_axis_rederives_every_term(self):
        plan = SweepPlan(axis="alpha", grid=(4.0,), fixed=2.0)
        two_terms = ShearFieldSpec(
            terms=((ShearProfile.sine(3), OUParams.from_alpha(16.0)),
                   (ShearProfile.sine(1), OUParams.from_alpha(1.0))), delta=2.0)
        spec = _spec_at(plan, two_terms, 4.0)
        for _, ou in spec.terms:
            assert ou.a == 4.0
            assert ou.stationary_variance == pytest.approx(2.0, rel=1e-14)


class TestFitLoglogSlope:
    def test_exact_square_law(self):
        rows = synthetic_rows([1, 2, 4, 8], [p**2 for p in (1, 2, 4, 8)])
        fit = fit_loglog_slope(rows, (0.5, 10.0))
        assert fit.slope == pytest.approx(2.0, abs=1e-10)

    def test_exact_linear_law(self):
        rows = synthetic_rows([1, 2, 4, 8], [3.0 * p for p in (1, 2, 4, 8)])
        fit = fit_loglog_slope(rows, (0.5, 10.0))
        assert fit.slope == pytest.approx(1.0, abs=1e-10)

    def test_insufficient_points(self):
        rows = synthetic_rows([1, 2], [1.0, 4.0])
        with pytest.raises(InsufficientPoints):
            fit_loglog_slope(rows, (0.5, 10.0))

    def test_nonpositive_enhancement_dropped(self):
        rows = synthetic_rows([1, 2, 4, 8], [1.0, -1.0, 16.0, 64.0])
        fit = fit_loglog_slope(rows, (0.5, 10.0))
        assert fit.n_points == 3


class TestRunSweep:
    def test_delta_zero_grid(self):
        plan = SweepPlan(axis="delta", grid=(0.0,), fixed=16.0, horizon=50.0,
                         n_paths=2, master_seed=1)
        rows = run_sweep(plan, base_spec(), 1.0)
        assert len(rows) == 1
        assert rows[0].c_star == pytest.approx(math.sqrt(2.0), rel=1e-6)
        assert abs(rows[0].enhancement) <= 2e-6

    def test_determinism(self):
        plan = SweepPlan(axis="delta", grid=(0.5, 1.0), fixed=4.0, horizon=50.0,
                         n_paths=2, master_seed=3)
        spec = base_spec(alpha=4.0)
        assert run_sweep(plan, spec, 1.0) == run_sweep(plan, spec, 1.0)

    def test_failed_point_skipped(self, monkeypatch):
        import shearfront.sweeps as sweeps_mod

        real = sweeps_mod.cstar

        def flaky(spec, fprime0, **kw):
            if spec.delta == 1.0:
                raise RuntimeError("synthetic failure")
            return real(spec, fprime0, **kw)

        monkeypatch.setattr(sweeps_mod, "cstar", flaky)
        plan = SweepPlan(axis="delta", grid=(0.5, 1.0), fixed=4.0, horizon=50.0,
                         n_paths=2, master_seed=3)
        rows = run_sweep(plan, base_spec(alpha=4.0), 1.0)
        assert [r.param for r in rows] == [0.5]

    def test_csv_schema(self, tmp_path):
        rows = synthetic_rows([1.0], [0.5])
        out = tmp_path / "sweep.csv"
        write_sweep_csv(rows, out)
        text = out.read_text()
        assert text.splitlines()[0] == ",".join(SWEEP_HEADER)
        assert "\r" not in text
        with open(out) as fh:
            parsed = list(csv.DictReader(fh))
        assert float(parsed[0]["param"]) == 1.0
        assert float(parsed[0]["enhancement"]) == 0.5


class TestDeskDeltaSweep:
    def test_enhancement_positive_and_nondecreasing(self, delta_sweep_rows):
        rows = delta_sweep_rows
        enh = np.array([r.enhancement for r in rows])
        err = np.array([r.stderr for r in rows])
        assert np.all(enh > 0)
        for i in range(len(rows) - 1):
            assert enh[i + 1] >= enh[i] - 3.0 * (err[i] + err[i + 1])

    def test_crossover_separation(self, delta_sweep_rows):
        small = fit_loglog_slope(delta_sweep_rows, (0.25, 2.0))
        large = fit_loglog_slope(delta_sweep_rows, (8.0, 32.0))
        assert small.slope - large.slope >= 0.5

    def test_every_row_within_bounds(self, delta_sweep_rows):
        for row in delta_sweep_rows:
            spec = base_spec(alpha=16.0, delta=row.param)
            assert check_bounds(row.c_star, row.stderr, spec, 1.0).ok


class TestDeskAlphaSweep:
    def test_rows_in_grid_order(self, alpha_sweep_rows):
        params = [r.param for r in alpha_sweep_rows]
        assert params == sorted(params)

    def test_small_alpha_scaling(self, alpha_sweep_rows):
        fit = fit_loglog_slope(alpha_sweep_rows, (0.25, 4.0))
        assert 0.35 <= fit.slope <= 0.65

    def test_every_row_within_bounds(self, alpha_sweep_rows):
        for row in alpha_sweep_rows:
            spec = ShearFieldSpec.single(ShearProfile.sine(3),
                                         OUParams.from_alpha(row.param), 2.0)
            assert check_bounds(row.c_star, row.stderr, spec, 1.0).ok
