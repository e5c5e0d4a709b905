import os

import numpy as np
import pytest

from slideopt import cli


def run_cli(argv):
    return cli.main(argv)


class TestRunCommand:
    def test_example1_run(self, tmp_path, capsys):
        out = tmp_path / "out"
        status = run_cli(["run", "--benchmark", "example1", "--controller",
                          "smc", "--K", "1", "--x0", "1", "--out", str(out),
                          "--no-figures"])
        assert status == 0
        captured = capsys.readouterr().out
        assert "[PASS]" in captured
        assert (out / "example1_smc_seed0.csv").exists()
        assert (out / "example1_smc_seed0.txt").exists()
        text = (out / "example1_smc_seed0.txt").read_text()
        assert "bound_satisfied = yes" in text

    def test_comparison_table(self, tmp_path, capsys):
        out = tmp_path / "cmp"
        status = run_cli(["run", "--benchmark", "nonconvex_qp",
                          "--controllers", "smc,pdgd,pi_cmo",
                          "--disturbance", "matched",
                          "--t-final", "3", "--out", str(out), "--no-figures"])
        assert status == 0
        table = (out / "nonconvex_qp_comparison.txt").read_text()
        assert "smc" in table and "pdgd" in table
        lines = table.splitlines()
        smc_row = next(l for l in lines if l.startswith("smc"))
        assert "finite" in smc_row
        pdgd_row = next(l for l in lines if l.startswith("pdgd"))
        assert "failed" in pdgd_row
        assert (out / "nonconvex_qp_comparison.csv").exists()

    def test_invalid_controller_name(self, tmp_path, capsys):
        status = run_cli(["run", "--benchmark", "example1", "--controller",
                          "mpc", "--out", str(tmp_path), "--no-figures"])
        assert status == 2
        err = capsys.readouterr().err
        assert "smc" in err   # names the valid options

    def test_invalid_benchmark_name(self, tmp_path, capsys):
        status = run_cli(["run", "--benchmark", "nonexistent",
                          "--out", str(tmp_path)])
        assert status == 2
        assert "example1" in capsys.readouterr().err

    def test_figures_rendered(self, tmp_path):
        out = tmp_path / "figs"
        status = run_cli(["run", "--benchmark", "example1",
                          "--t-final", "1.2", "--out", str(out)])
        assert status == 0
        assert (out / "violations.png").stat().st_size > 0
        assert (out / "states.png").stat().st_size > 0

    def test_byte_identical_reruns(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli(["run", "--benchmark", "example1", "--out",
                            str(out), "--no-figures"]) == 0
            outs.append((out / "example1_smc_seed0.csv").read_bytes())
        assert outs[0] == outs[1]


class TestSweepCommand:
    def test_dt_sweep_chattering_monotone(self, tmp_path):
        out = tmp_path / "sw"
        status = run_cli(["sweep", "--benchmark", "example1",
                          "--axis", "integrator.dt",
                          "--values", "4e-4,2e-4,1e-4",
                          "--out", str(out), "--no-figures"])
        assert status == 0
        rows = (out / "sweep.csv").read_text().splitlines()[1:]
        amps = [float(r.split(",")[2]) for r in rows]
        assert amps[0] > amps[1] > amps[2]

    def test_gain_sweep_reaching_time(self, tmp_path):
        # dt small enough that sign chatter (dt*K) stays under the settle
        # tolerance at the largest gain
        out = tmp_path / "swk"
        status = run_cli(["sweep", "--benchmark", "example1", "--axis", "K",
                          "--values", "5,10,20", "--dt", "2e-5",
                          "--out", str(out), "--no-figures"])
        assert status == 0
        rows = (out / "sweep.csv").read_text().splitlines()[1:]
        reach = [float(r.split(",")[1]) for r in rows]
        for K, rt in zip((5.0, 10.0, 20.0), reach):
            assert rt == pytest.approx(1.0 / K, abs=5e-3)
        assert reach[0] > reach[1] > reach[2]

    def test_empty_values(self, tmp_path, capsys):
        status = run_cli(["sweep", "--benchmark", "example1", "--axis", "K",
                          "--values", "", "--out", str(tmp_path)])
        assert status == 2


class TestListCommand:
    def test_lists_benchmarks(self, capsys):
        assert run_cli(["list"]) == 0
        out = capsys.readouterr().out
        for name in ("example1", "nonconvex_qp", "obstacle_course",
                     "shidoku", "consensus_estimation"):
            assert name in out


class TestConfigHandling:
    def test_parse_config_text(self):
        cfg = cli.parse_config_text(
            "# comment\nbenchmark = example1\ncontroller.smc.K = 20\n\n")
        assert cfg == {"benchmark": "example1", "controller.smc.K": "20"}

    def test_bad_line(self):
        with pytest.raises(ValueError):
            cli.parse_config_text("benchmark example1")

    def test_config_file_run(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("benchmark = example1\nK = 2\nx0 = 1\n"
                           f"output_dir = {tmp_path / 'out'}\nfigures = false\n")
        status = run_cli(["run", "--config", str(cfgfile)])
        assert status == 0
        report = (tmp_path / "out" / "example1_smc_seed0.txt").read_text()
        assert "bound_satisfied = yes" in report

    def test_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SLIDEOPT_INTEGRATOR__T_FINAL", "1.4")
        monkeypatch.setenv("SLIDEOPT_OUTPUT_DIR", str(tmp_path / "envout"))
        status = run_cli(["run", "--benchmark", "example1", "--no-figures"])
        assert status == 0
        assert (tmp_path / "envout" / "example1_smc_seed0.csv").exists()

    def test_cli_overrides_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SLIDEOPT_OUTPUT_DIR", str(tmp_path / "envout"))
        status = run_cli(["run", "--benchmark", "example1", "--out",
                          str(tmp_path / "cliout"), "--no-figures"])
        assert status == 0
        assert (tmp_path / "cliout" / "example1_smc_seed0.csv").exists()
        assert not (tmp_path / "envout").exists()

    def test_custom_problem_config(self, tmp_path):
        cfgfile = tmp_path / "prob.cfg"
        cfgfile.write_text(
            "problem.Q = 2,0;0,2\n"
            "problem.A = 1,0\n"
            "problem.x0 = 1,1\n"
            "controller.K = 2\n"
            f"output_dir = {tmp_path / 'out'}\n"
            "figures = false\n"
            "integrator.t_final = 1.0\n")
        status = run_cli(["run", "--config", str(cfgfile)])
        assert status == 0
        assert (tmp_path / "out" / "custom_smc_seed0.csv").exists()


class TestSeeds:
    def test_multiple_seeds_write_per_seed_outputs(self, tmp_path):
        out = tmp_path / "seeds"
        status = run_cli(["run", "--benchmark", "example1", "--seeds", "0,1",
                          "--out", str(out), "--no-figures"])
        assert status == 0
        assert (out / "example1_smc_seed0.csv").exists()
        assert (out / "example1_smc_seed1.csv").exists()


class TestExitEncodesAcceptance:
    def test_obstacle_expected_metrics_fail_nonzero_exit(self, tmp_path, capsys):
        # the obstacle settling/goal expectations are unattainable (empty
        # equality set); the CLI must report FAIL and exit nonzero
        out = tmp_path / "obs"
        status = run_cli(["run", "--benchmark", "obstacle_course",
                          "--t-final", "2.0", "--out", str(out),
                          "--no-figures"])
        assert status == 1
        assert "[FAIL]" in capsys.readouterr().out
        assert (out / "obstacle_course_smc_seed0.csv").exists()
