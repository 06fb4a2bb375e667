import math

import numpy as np
import pytest
import scipy.optimize

from shearfront.lyapunov import LyapunovEstimate, steady_shear_rho_oracle
from shearfront.speed import (BracketExhausted, GoldenResult, SpeedResult, cstar,
                              cstar_homogeneous, golden_minimize)
from shearfront.shear import OUParams, ShearFieldSpec, ShearProfile

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class TestHomogeneous:
    @pytest.mark.parametrize("fprime0,c_expect", [(1.0, math.sqrt(2.0)), (2.0, 2.0), (0.5, 1.0)])
    def test_closed_form(self, fprime0, c_expect):
        c, lam = cstar_homogeneous(fprime0)
        assert c == pytest.approx(c_expect, rel=1e-15)
        assert lam == pytest.approx(c_expect, rel=1e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            cstar_homogeneous(0.0)


class TestGoldenMinimize:
    def test_quadratic(self):
        res = golden_minimize(lambda x: (x - 1.3) ** 2, 0.0, 4.0, 1e-6)
        assert res.x_star == pytest.approx(1.3, abs=1e-5)
        assert not res.at_right_edge

    def test_widths_shrink_by_golden_ratio(self):
        res = golden_minimize(lambda x: (x - 1.3) ** 2, 0.0, 4.0, 1e-4)
        w = np.asarray(res.widths)
        assert np.all(np.diff(w) < 0)
        ratios = w[1:] / w[:-1]
        assert np.allclose(ratios, INV_PHI, atol=1e-9)

    def test_right_edge_detection(self):
        res = golden_minimize(lambda x: -x, 0.0, 1.0, 1e-4)
        assert res.at_right_edge

    def test_validates_inputs(self):
        with pytest.raises(ValueError):
            golden_minimize(lambda x: x, 1.0, 0.0, 1e-3)


class TestCstarHomogeneousLimit:
    def test_delta_zero_recovers_closed_form(self):
        spec = ShearFieldSpec.single(ShearProfile.sine(3), OUParams.from_alpha(1.0), 0.0)
        result = cstar(spec, 1.0, master_seed=0)
        c0 = math.sqrt(2.0)
        assert abs(result.c_star - c0) / c0 <= 1e-6
        assert abs(result.lambda_star - c0) <= 1e-3
        assert result.c_star == result.mu_at_star / result.lambda_star
        lo, hi = result.bracket
        assert lo < result.lambda_star < hi
        assert result.bounds_report.ok

    def test_determinism(self):
        spec = ShearFieldSpec.single(ShearProfile.sine(3), OUParams.from_alpha(4.0), 1.0)
        a = cstar(spec, 1.0, n_paths=4, horizon=50.0, master_seed=42)
        b = cstar(spec, 1.0, n_paths=4, horizon=50.0, master_seed=42)
        assert a == b

    def test_evaluations_recorded(self):
        spec = ShearFieldSpec.single(ShearProfile.sine(3), OUParams.from_alpha(1.0), 0.0)
        result = cstar(spec, 1.0, master_seed=0)
        lams = [lam for lam, _, _ in result.evaluations]
        assert result.lambda_star in lams
        assert len(lams) == len(set(lams))  # cache prevents re-evaluation


class TestFrozenShearSpeed:
    def test_matches_oracle_minimization(self):
        profile = ShearProfile.sine(3)
        spec = ShearFieldSpec.single(profile, OUParams.from_alpha(1.0), 2.0, frozen=True)
        result = cstar(spec, 1.0, estimator="single", horizon=200.0, master_seed=0)

        def g(lam):
            return lam / 2 + 1.0 / lam + steady_shear_rho_oracle(profile, lam * 2.0, 0.01) / lam

        ref = scipy.optimize.minimize_scalar(g, bounds=(0.05, 6.0), method="bounded",
                                             options={"xatol": 1e-8})
        assert abs(result.c_star - ref.fun) / ref.fun <= 0.01
        assert result.c_star >= math.sqrt(2.0)  # enhancement is nonnegative
        assert result.bounds_report.ok


class TestBracketExpansion:
    def test_exhaustion_raises(self, monkeypatch):
        # force g(lam) = 1/lam (monotone decreasing): the minimum never
        # detaches from the right edge and expansion must give up
        def fake_single(spec, lam, fprime0, horizon, seed, config):
            return LyapunovEstimate(lam=lam, mu_hat=1.0, rho_hat=0.0,
                                    series=np.array([[horizon, 1.0]]), stderr=0.0,
                                    n_paths=1, horizon=horizon, error_bar=False)

        import shearfront.speed as speed_mod
        monkeypatch.setattr(speed_mod, "mu_single_path", fake_single)
        spec = ShearFieldSpec.single(ShearProfile.sine(3), OUParams.from_alpha(1.0), 0.0)
        with pytest.raises(BracketExhausted):
            cstar(spec, 1.0, estimator="single", horizon=10.0, master_seed=0)

    def test_validates_inputs(self):
        spec = ShearFieldSpec.single(ShearProfile.sine(3), OUParams.from_alpha(1.0), 0.0)
        with pytest.raises(ValueError, match="lambda_tol"):
            cstar(spec, 1.0, master_seed=0, lambda_tol=0.0)
        with pytest.raises(ValueError, match="estimator"):
            cstar(spec, 1.0, master_seed=0, estimator="bogus")
