"""Command-line interface: dispatch, exit codes, determinism, outputs."""

import json

import numpy as np
import pytest

from holodisc import formats
from holodisc.cli import RunConfig, build_parser, config_from_args, main
from holodisc.diskops import GridFunction, disc_grid, lower_arc_cutoff


@pytest.fixture()
def workdir(tmp_path):
    g = disc_grid(32, 64)
    formats.write_grid_function(tmp_path / "zeros.csv",
                                GridFunction(g, np.zeros_like(g.zeta)))
    formats.write_grid_function(tmp_path / "ones.csv",
                                GridFunction(g, np.ones_like(g.zeta)))
    formats.write_boundary(tmp_path / "phi.csv", lower_arc_cutoff(64))
    (tmp_path / "w2.txt").write_text("n 2\nmodel true\ndelta 0.1\n")
    (tmp_path / "f.txt").write_text("name branch_power\n")
    (tmp_path / "fp.txt").write_text("name perturbed\neps 0.1\n")
    return tmp_path


def run_cli(args):
    return main([str(a) for a in args])


class TestDispatch:
    def test_cg_zeros(self, workdir):
        out = workdir / "out.csv"
        code = run_cli(["cg", "--input", workdir / "zeros.csv",
                        "--grid", "32x64", "--out", out])
        assert code == 0
        back = formats.read_grid_function(out, disc_grid)
        assert np.max(np.abs(back.values)) == 0.0

    def test_solve_disc_closed_form(self, workdir):
        out = workdir / "disc.csv"
        code = run_cli(["solve-disc", "--A", "const 0.3", "--seed", "zeta",
                        "--grid", "32x64", "--tol", "1e-8", "--out", out])
        assert code == 0
        disc = formats.read_disc(out, disc_grid)
        g = disc.grid
        assert np.max(np.abs(disc.values[0] - (g.zeta + 0.3 * np.conj(g.zeta)))) < 1e-8

    def test_malformed_wedge_exits_2(self, workdir):
        bad = workdir / "bad.txt"
        bad.write_text("n 2\ngraph 1: 0.05 q1^2\n")
        code = run_cli(["family", "--wedge", bad, "--c", "0", "--t", "1",
                        "--grid", "32x64", "--out", workdir / "x.csv"])
        assert code == 2

    def test_missing_file_exits_2(self, workdir):
        code = run_cli(["cg", "--input", workdir / "nope.csv",
                        "--grid", "32x64", "--out", workdir / "x.csv"])
        assert code == 2

    def test_numeric_failure_exits_1(self, workdir):
        code = run_cli(["solve-disc", "--A", "linear 1.5", "--seed", "zeta",
                        "--grid", "32x64", "--out", workdir / "x.csv"])
        assert code == 1

    def test_fatou_writes_schema(self, workdir):
        out = workdir / "verdicts.json"
        code = run_cli(["--seed", "7", "fatou", "--wedge", workdir / "w2.txt",
                        "--F", workdir / "f.txt", "--edge-samples", "20",
                        "--dirs", "4", "--grid", "32x64", "--out", out,
                        "--no-figures"])
        assert code == 0
        data = json.loads(out.read_text())
        assert "summary" in data and "points" in data
        rec = data["points"][0]
        for key in ("coords", "verdict", "limit", "error_bar", "per_direction"):
            assert key in rec

    def test_figures_rendered(self, workdir):
        out = workdir / "verdicts.json"
        code = run_cli(["--seed", "7", "fatou", "--wedge", workdir / "w2.txt",
                        "--F", workdir / "f.txt", "--edge-samples", "10",
                        "--dirs", "4", "--grid", "32x64", "--out", out])
        assert code == 0
        fig = workdir / "verdicts_verdicts.png"
        assert fig.exists() and fig.stat().st_size > 0


class TestDeterminism:
    def test_identical_reruns(self, workdir):
        out = workdir / "v.json"
        blobs = []
        for _ in range(2):
            code = run_cli(["--seed", "11", "fatou", "--wedge", workdir / "w2.txt",
                            "--F", workdir / "f.txt", "--edge-samples", "30",
                            "--dirs", "4", "--grid", "32x64", "--out", out,
                            "--no-figures"])
            assert code == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_thread_count_does_not_change_payload(self, workdir):
        outs = []
        for threads, name in ((1, "t1.json"), (3, "t3.json")):
            out = workdir / name
            code = run_cli(["--seed", "11", "--threads", threads,
                            "fatou", "--wedge", workdir / "w2.txt",
                            "--F", workdir / "f.txt", "--edge-samples", "30",
                            "--dirs", "4", "--grid", "32x64", "--out", out,
                            "--no-figures"])
            assert code == 0
            data = json.loads(out.read_text())
            data.pop("config")  # config echo differs by thread count and path
            outs.append(json.dumps(data, sort_keys=True))
        assert outs[0] == outs[1]


class TestConfig:
    def test_round_trip(self, workdir):
        parser = build_parser()
        args = parser.parse_args(["--seed", "3", "fatou", "--wedge", "w.txt",
                                  "--F", "f.txt", "--edge-samples", "5",
                                  "--dirs", "2", "--out", "o.json"])
        cfg = config_from_args(args)
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    def test_invalid_tolerance_rejected(self):
        from holodisc.errors import ConfigError
        cfg = RunConfig(command="solve-disc", params={"tol": -1.0})
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_sign_error_mutation_detected(self):
        # a sign flip in the structure term leaves a large residual on the
        # exact solution, so the solver checks would catch the mutation
        from holodisc.accal import ComplexMatrixField
        from holodisc.discsolve import DiscMap, holomorphy_residual
        g = disc_grid(32, 64)
        vals = g.zeta + 0.3 * np.conj(g.zeta)
        disc = DiscMap(g, vals[None])
        good = holomorphy_residual(disc, ComplexMatrixField.constant([[0.3]]))
        mutated = holomorphy_residual(disc, ComplexMatrixField.constant([[-0.3]]))
        assert good < 1e-8
        assert mutated > 0.1


class TestConfigFile:
    def test_defaults_from_file_with_flag_override(self, workdir):
        cfgfile = workdir / "run.cfg"
        cfgfile.write_text("# defaults for small runs\n"
                           "grid 32x64\n"
                           "edge_samples 12\n"
                           "dirs 4\n")
        out = workdir / "v.json"
        code = run_cli(["--seed", "5", "--config", cfgfile, "fatou",
                        "--wedge", workdir / "w2.txt", "--F", workdir / "f.txt",
                        "--edge-samples", "8",  # explicit flag wins
                        "--out", out, "--no-figures"])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["config"]["params"]["edge_samples"] == 8      # flag override
        assert data["config"]["params"]["dirs"] == 4              # from config
        assert data["config"]["params"]["n_theta"] == 64          # from config

    def test_unknown_key_rejected(self, workdir):
        cfgfile = workdir / "run.cfg"
        cfgfile.write_text("bogus_key 3\n")
        code = run_cli(["--config", cfgfile, "fatou", "--wedge", workdir / "w2.txt",
                        "--F", workdir / "f.txt", "--edge-samples", "4",
                        "--grid", "32x64", "--out", workdir / "x.json",
                        "--no-figures"])
        assert code == 2

    def test_exceptional_set_reported(self, workdir):
        out = workdir / "v.json"
        code = run_cli(["--seed", "5", "fatou", "--wedge", workdir / "w2.txt",
                        "--F", workdir / "f.txt", "--edge-samples", "10",
                        "--dirs", "4", "--grid", "32x64", "--out", out,
                        "--no-figures"])
        assert code == 0
        data = json.loads(out.read_text())
        assert "exceptional_points" in data["summary"]
