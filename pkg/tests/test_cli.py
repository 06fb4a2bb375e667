import csv
import math
import subprocess
import sys

import pytest

from shearfront.cli import ConfigError, build_config, build_parser, main, parse_config_file
from shearfront.lyapunov import steady_shear_rho_oracle
from shearfront.shear import ShearProfile


def run_cli(args):
    return main([str(a) for a in args])


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestConfigParsing:
    def test_file_then_flags(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("delta = 1.5\nalpha = 4\n# comment\nk = 3\n")
        args = build_parser().parse_args(["mu", "--lambda", "0.5",
                                          "--config", str(cfg_file), "--delta", "0.0"])
        cfg = build_config(args)
        assert cfg.delta == 0.0  # flag wins
        assert cfg.alpha == 4.0  # file value survives

    def test_unknown_key_rejected(self, tmp_path):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("detla = 1.5\n")
        with pytest.raises(ConfigError, match="detla"):
            parse_config_file(str(cfg_file))

    def test_malformed_line_rejected(self, tmp_path):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("delta 1.5\n")
        with pytest.raises(ConfigError, match="key = value"):
            parse_config_file(str(cfg_file))

    def test_profile_serialization_forms(self, tmp_path):
        cfg_file = tmp_path / "profile.cfg"
        cfg_file.write_text("profile = sine\nk = 3\n")
        args = build_parser().parse_args(["mu", "--lambda", "0", "--config", str(cfg_file)])
        assert build_config(args).shear_profile() == ShearProfile.sine(3)
        cfg_file.write_text("profile = table\nvalues = 0,1,0,-1,0,1,0,-1\n")
        args = build_parser().parse_args(["mu", "--lambda", "0", "--config", str(cfg_file)])
        profile = build_config(args).shear_profile()
        assert profile.kind == "table"
        assert profile.samples == (0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0)

    def test_negative_alpha_exit_2(self, tmp_path, capsys):
        code = run_cli(["mu", "--lambda", "1", "--alpha", "-2", "--out", tmp_path])
        assert code == 2
        assert "alpha" in capsys.readouterr().err

    def test_validation_names_the_key(self):
        args = build_parser().parse_args(["mu", "--lambda", "1", "--fprime0", "-1"])
        with pytest.raises(ConfigError, match="fprime0"):
            build_config(args)


class TestCmdMu:
    def test_lambda_zero_delta_zero(self, tmp_path):
        assert run_cli(["mu", "--lambda", "0", "--delta", "0", "--out", tmp_path]) == 0
        row = read_csv(tmp_path / "mu_summary.csv")[0]
        assert float(row["mu_hat"]) == 1.0
        assert float(row["rho_hat"]) == 0.0

    def test_delta_zero_lambda_one(self, tmp_path):
        assert run_cli(["mu", "--lambda", "1", "--delta", "0", "--fprime0", "1",
                        "--out", tmp_path]) == 0
        row = read_csv(tmp_path / "mu_summary.csv")[0]
        assert float(row["mu_hat"]) == 1.5

    def test_frozen_matches_oracle(self, tmp_path):
        assert run_cli(["mu", "--frozen", "--lambda", "1", "--delta", "1",
                        "--horizon", "200", "--out", tmp_path]) == 0
        row = read_csv(tmp_path / "mu_summary.csv")[0]
        oracle = steady_shear_rho_oracle(ShearProfile.sine(3), 1.0, 0.01)
        assert abs(float(row["rho_hat"]) - oracle) <= 0.01 * abs(oracle) + 1e-4

    def test_trace_csv(self, tmp_path):
        assert run_cli(["mu", "--lambda", "0.5", "--delta", "0.5", "--alpha", "4",
                        "--horizon", "20", "--trace", "--out", tmp_path]) == 0
        text = (tmp_path / "mu_trace.csv").read_text()
        assert text.splitlines()[0] == "lambda,t,mu_t"
        assert "\r" not in text

    def test_ensemble_summary_columns(self, tmp_path):
        assert run_cli(["mu", "--lambda", "0.5", "--delta", "1", "--alpha", "4",
                        "--estimator", "ensemble", "--n-paths", "3",
                        "--horizon", "20", "--out", tmp_path]) == 0
        text = (tmp_path / "mu_summary.csv").read_text()
        assert text.splitlines()[0] == "lambda,mu_hat,rho_hat,stderr,n_paths,horizon"


class TestCmdSpeed:
    def test_delta_zero(self, tmp_path):
        assert run_cli(["speed", "--delta", "0", "--seed", "1", "--out", tmp_path]) == 0
        row = read_csv(tmp_path / "speed.csv")[0]
        assert abs(float(row["c_star"]) - math.sqrt(2)) / math.sqrt(2) <= 1e-6
        assert row["ok"] == "1"

    def test_byte_identical_rerun(self, tmp_path):
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        for out in (a_dir, b_dir):
            assert run_cli(["speed", "--delta", "0.5", "--alpha", "4", "--seed", "9",
                            "--n-paths", "2", "--estimator", "ensemble",
                            "--horizon", "30", "--out", out]) == 0
        assert (a_dir / "speed.csv").read_bytes() == (b_dir / "speed.csv").read_bytes()

    def test_seed_required(self, capsys):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["speed", "--delta", "0"])
        assert exc.value.code == 2

    def test_uniform_shear_keeps_homogeneous_speed(self, tmp_path):
        # spatially uniform b1 cannot enhance the front
        assert run_cli(["speed", "--uniform-shear", "--delta", "5", "--alpha", "4",
                        "--estimator", "ensemble", "--n-paths", "20",
                        "--horizon", "2000", "--seed", "7", "--out", tmp_path]) == 0
        row = read_csv(tmp_path / "speed.csv")[0]
        assert abs(float(row["c_star"]) - math.sqrt(2)) <= 0.02 * math.sqrt(2)


class TestCmdSweep:
    def test_tiny_delta_sweep(self, tmp_path):
        assert run_cli(["sweep", "--axis", "delta", "--grid", "0,0.5", "--fixed", "4",
                        "--alpha", "4", "--seed", "5", "--n-paths", "2",
                        "--horizon", "30", "--out", tmp_path]) == 0
        rows = read_csv(tmp_path / "sweep.csv")
        assert [float(r["param"]) for r in rows] == [0.0, 0.5]

    def test_alpha_axis(self, tmp_path):
        assert run_cli(["sweep", "--axis", "alpha", "--grid", "1,4", "--fixed", "0.5",
                        "--delta", "0.5", "--seed", "5", "--n-paths", "2",
                        "--horizon", "30", "--out", tmp_path]) == 0
        assert len(read_csv(tmp_path / "sweep.csv")) == 2

    def test_non_monotone_grid_exit_2(self, tmp_path, capsys):
        code = run_cli(["sweep", "--axis", "delta", "--grid", "1,0.5", "--seed", "5",
                        "--out", tmp_path])
        assert code == 2
        assert "increasing" in capsys.readouterr().err

    def test_slope_fit_outputs(self, tmp_path):
        assert run_cli(["sweep", "--axis", "delta", "--grid", "0.25,0.5,1",
                        "--alpha", "4", "--seed", "5", "--n-paths", "2",
                        "--horizon", "60", "--fit-small", "0.2,1.1",
                        "--out", tmp_path]) == 0
        text = (tmp_path / "slopes.csv").read_text()
        assert text.splitlines()[0] == "range_lo,range_hi,slope,half_width,n_points"


class TestCmdValidate:
    def test_quick_passes_under_budget(self, tmp_path):
        import time
        t0 = time.time()
        assert run_cli(["validate", "--quick", "--out", tmp_path]) == 0
        assert time.time() - t0 < 60.0

    def test_corrupted_config_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("alpha = -4\n")
        code = run_cli(["validate", "--quick", "--config", cfg, "--out", tmp_path])
        assert code == 2
        assert "alpha" in capsys.readouterr().err


class TestEntryPoint:
    def test_console_script(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "shearfront.cli", "mu",
                               "--lambda", "0", "--delta", "0", "--out", str(tmp_path)],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "mu_hat=1.0" in proc.stdout
