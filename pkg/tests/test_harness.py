"""Experiment configs, truncation, report plumbing, CLI contract."""

import json

import numpy as np
import pytest

from memdiff.cli import main
from memdiff.errors import ConfigurationError, DomainError
from memdiff.harness import (
    Check,
    ExperimentConfig,
    VerificationReport,
    initial_profile,
    truncate_data,
    write_csv,
    write_json,
)
from memdiff.spatial import SpaceGrid, cutoff, mass


class TestExperimentConfig:
    def test_defaults_valid(self):
        cfg = ExperimentConfig()
        cfg.validate()
        assert cfg.space_grid().dim == 1
        assert cfg.time_grid().steps == 500

    def test_decimal_strings(self):
        cfg = ExperimentConfig.from_dict({"tau": "1e-3", "h": "0.05", "seed": 3})
        assert cfg.tau == 1e-3
        assert cfg.seed == 3

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict({"betta": 1.0})

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict({"alpha": 1.5})
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict({"suite": "nope"})
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict({"profile": "spiral"})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_json(str(tmp_path / "nope.json"))

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_json(str(p))

    def test_sine_profile_uses_interval(self):
        cfg = ExperimentConfig(profile="sine", h=np.pi / 100)
        g = cfg.space_grid()
        assert g.lo == (0.0,)
        assert g.hi[0] == pytest.approx(np.pi)


class TestProfiles:
    def test_gaussian_and_box_nonnegative(self):
        grid = SpaceGrid.box(5.0, 0.1, 1)
        for profile in ("gaussian", "box"):
            cfg = ExperimentConfig(profile=profile, amplitude=2.0)
            u = initial_profile(cfg, grid)
            assert np.all(u >= 0.0)
            assert np.max(u) == pytest.approx(2.0, abs=1e-6)

    def test_random_profile_deterministic(self):
        grid = SpaceGrid.box(5.0, 0.1, 1)
        cfg = ExperimentConfig(profile="random", seed=9)
        u1 = initial_profile(cfg, grid)
        u2 = initial_profile(cfg, grid)
        assert np.array_equal(u1, u2)
        cfg2 = ExperimentConfig(profile="random", seed=10)
        assert not np.array_equal(u1, initial_profile(cfg2, grid))


class TestTruncateData:
    def setup_method(self):
        self.grid = SpaceGrid.box(8.0, 0.1, 1)
        self.psi = cutoff(4.0, self.grid)

    def test_identity_when_within_caps(self):
        r = self.grid.radius()
        u0 = np.exp(-(r**2))  # support well inside the cutoff plateau
        out = truncate_data(u0, 5.0, 5.0, self.psi)
        inner = r <= 2.5
        np.testing.assert_allclose(out[inner], u0[inner], atol=1e-12)

    def test_upper_branch(self):
        u0 = np.full(self.grid.size, 6.0)
        out = truncate_data(u0, 3.0, 2.0, self.psi)
        np.testing.assert_allclose(out, 3.0 * self.psi, atol=1e-14)

    def test_lower_branch(self):
        u0 = np.full(self.grid.size, -9.0)
        out = truncate_data(u0, 3.0, 2.0, self.psi)
        np.testing.assert_allclose(out, -2.0 * self.psi, atol=1e-14)

    def test_l1_never_grows(self):
        rng = np.random.default_rng(2)
        u0 = rng.normal(0, 4, self.grid.size)
        out = truncate_data(u0, 2.0, 3.0, self.psi)
        assert mass(np.abs(out), self.grid) <= mass(np.abs(u0), self.grid) + 1e-12

    def test_monotone_in_upper_cap_for_nonnegative_data(self):
        rng = np.random.default_rng(3)
        u0 = rng.uniform(0, 10, self.grid.size)
        prev = truncate_data(u0, 1.0, 1.0, cutoff(1.0, self.grid))
        for n in (2.0, 3.0, 4.0):
            cur = truncate_data(u0, n, 1.0, cutoff(n, self.grid))
            assert np.all(cur >= prev - 1e-14)
            prev = cur

    def test_antitone_in_lower_cap(self):
        rng = np.random.default_rng(4)
        u0 = rng.normal(0, 5, self.grid.size)
        prev = truncate_data(u0, 3.0, 1.0, self.psi)
        for m in (2.0, 4.0, 8.0):
            cur = truncate_data(u0, 3.0, m, self.psi)
            assert np.all(cur <= prev + 1e-14)
            prev = cur

    def test_caps_below_one_rejected(self):
        with pytest.raises(DomainError):
            truncate_data(np.zeros(self.grid.size), 0.5, 1.0, self.psi)


class TestReportPlumbing:
    def test_report_counts_and_dict(self):
        checks = [
            Check("a", "claim a", 0.0, 1.0, True),
            Check("b", "claim b", 2.0, 1.0, False),
            Check("c", "claim c", 0.0, 1.0, False, illustrative=True),
        ]
        rep = VerificationReport(suite="demo", params={}, checks=checks)
        assert rep.n_failed == 1
        assert not rep.passed
        d = rep.to_dict()
        assert d["counts"] == {"total": 3, "passed": 2, "failed": 1}
        assert all(
            {"name", "claim", "measured", "tolerance", "passed"} <= set(c)
            for c in d["checks"]
        )
        assert len(list(rep.lines())) == 3

    def test_write_csv_deterministic(self, tmp_path):
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        t = np.linspace(0, 1, 11)
        v = np.sqrt(t + 1.0 / 3.0)
        write_csv(str(p1), ["t", "v"], [t, v])
        write_csv(str(p2), ["t", "v"], [t, v])
        b1, b2 = p1.read_bytes(), p2.read_bytes()
        assert b1 == b2
        lines = b1.decode().strip().split("\n")
        assert lines[0] == "t,v"
        # 17 significant digits survive a round trip
        back = float(lines[5].split(",")[1])
        assert back == v[4]

    def test_write_json_handles_numpy_scalars(self, tmp_path):
        p = tmp_path / "r.json"
        write_json(str(p), {"x": np.float64(1.5), "n": np.int64(2),
                            "b": np.bool_(True), "arr": np.arange(3)})
        data = json.loads(p.read_text())
        assert data == {"x": 1.5, "n": 2, "b": True, "arr": [0, 1, 2]}


class TestSuites:
    def test_nonextinction_zero_data_is_vacuous(self):
        from memdiff.harness import suite_nonextinction

        rep = suite_nonextinction(ExperimentConfig(amplitude=0.0))
        assert rep.passed
        assert len(rep.checks) == 1
        assert rep.checks[0].details.get("vacuous") is True

    def test_contraction_identical_pair_trivial(self):
        # same data through the same config: every gap is exactly zero
        from memdiff.spatial import SpaceGrid
        from memdiff.kernels import TimeGrid
        from memdiff.stepper import SolveConfig, solve

        grid = SpaceGrid.box(1.0, 0.1, 1)
        tgrid = TimeGrid(tau=0.01, steps=10)
        rng = np.random.default_rng(21)
        u0 = rng.uniform(-1, 1, grid.size)
        cfg = SolveConfig.for_power_law(0.5, 0.5, grid, tgrid, u0=u0)
        assert np.array_equal(solve(cfg, u0).fields, solve(cfg, u0).fields)


class TestCli:
    def test_verify_kernels_exit_zero(self, tmp_path, capsys):
        rc = main(["verify", "--suite", "kernels", "--alpha", "0.5",
                   "--out", str(tmp_path)])
        assert rc == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["passed"] is True
        assert report["suites"][0]["suite"] == "kernels"
        for check in report["suites"][0]["checks"]:
            assert check["claim"]
            assert "tolerance" in check
        out = capsys.readouterr().out
        assert "[PASS]" in out

    def test_missing_config_exit_two(self, tmp_path, capsys):
        rc = main(["verify", "--config", str(tmp_path / "missing.json")])
        assert rc == 2

    def test_malformed_config_exit_two(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text('{"alpha": "not-a-number"}')
        rc = main(["verify", "--config", str(p)])
        assert rc == 2

    def test_solve_csv_columns(self, tmp_path):
        rc = main([
            "solve", "--m", "1", "--profile", "sine", "--tau", "0.01",
            "--T", "0.05", "--h", str(np.pi / 50), "--out", str(tmp_path),
        ])
        assert rc == 0
        lines = (tmp_path / "solve.csv").read_text().strip().split("\n")
        assert lines[0] == "t,mass,l1,l2,linf,u_mass_G"
        assert len(lines) == 1 + 6  # header + J+1 rows

    def test_solve_applies_data_truncation(self, tmp_path):
        cfgp = tmp_path / "cfg.json"
        cfgp.write_text(json.dumps({
            "profile": "box", "amplitude": 12.0, "width": 1.0, "radius": 5.0,
            "h": 0.1, "tau": 0.01, "horizon": 0.02, "m": 1.0, "trunc_n": 2.0,
        }))
        rc = main(["solve", "--config", str(cfgp), "--out", str(tmp_path)])
        assert rc == 0
        first = (tmp_path / "solve.csv").read_text().strip().split("\n")[1]
        linf0 = float(first.split(",")[4])
        assert linf0 == pytest.approx(2.0, abs=1e-12)  # clamped to the upper cap

    def test_solve_deterministic_bytes(self, tmp_path):
        args = ["solve", "--m", "0.5", "--profile", "random", "--seed", "5",
                "--tau", "0.01", "--T", "0.05", "--radius", "1.0", "--h", "0.1"]
        rc1 = main(args + ["--out", str(tmp_path / "r1")])
        rc2 = main(args + ["--out", str(tmp_path / "r2")])
        assert rc1 == rc2 == 0
        assert (tmp_path / "r1/solve.csv").read_bytes() == (
            tmp_path / "r2/solve.csv"
        ).read_bytes()

    def test_ode_subcommand(self, tmp_path, capsys):
        rc = main(["ode", "--alpha", "0.5", "--m", "1", "--lam", "1.0",
                   "--tau", "0.01", "--T", "1", "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "ode.csv").read_text().strip().split("\n")
        assert lines[0] == "t,v"
        assert len(lines) == 1 + 101
        assert "envelope" in capsys.readouterr().out

    def test_config_file_with_flag_override(self, tmp_path):
        cfgp = tmp_path / "cfg.json"
        cfgp.write_text(json.dumps({
            "m": "1.0", "profile": "sine", "tau": "0.01", "horizon": 0.05,
            "h": np.pi / 50,
        }))
        rc = main(["solve", "--config", str(cfgp), "--T", "0.03",
                   "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "solve.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 4  # override shortened the run

    def test_verify_report_deterministic_bytes(self, tmp_path):
        a1 = ["verify", "--suite", "kernels", "--seed", "4"]
        assert main(a1 + ["--out", str(tmp_path / "v1")]) == 0
        assert main(a1 + ["--out", str(tmp_path / "v2")]) == 0
        assert (tmp_path / "v1/report.json").read_bytes() == (
            tmp_path / "v2/report.json"
        ).read_bytes()
        assert (tmp_path / "v1/checks.csv").read_bytes() == (
            tmp_path / "v2/checks.csv"
        ).read_bytes()

    def test_out_dir_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MEMDIFF_OUT", str(tmp_path / "envout"))
        rc = main(["solve", "--m", "1", "--profile", "sine", "--tau", "0.01",
                   "--T", "0.03", "--h", str(np.pi / 50)])
        assert rc == 0
        assert (tmp_path / "envout" / "solve.csv").exists()

    def test_verify_failure_exit_one(self, tmp_path, monkeypatch):
        # force a failing check through a stub suite
        import memdiff.harness as hz

        def failing_suite(cfg):
            return hz.VerificationReport(
                suite="kernels", params={},
                checks=[Check("stub", "always fails", 1.0, 0.0, False)],
            )

        monkeypatch.setitem(hz._SUITES, "kernels", failing_suite)
        rc = main(["verify", "--suite", "kernels", "--out", str(tmp_path)])
        assert rc == 1
