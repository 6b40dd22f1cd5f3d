"""CLI subcommands: exit codes, emitted files, determinism."""

import json
import os

import pytest

from torusns.cli import main

SIM_CFG = """
[grid]
dim = 2
n = 32

[fluid]
mu = 1.0

[initial]
density = disk
eps = 0.1
velocity = taylor_green
amplitude = 0.8
seed = 3

[experiment]
t_end = 0.08
dt_max = 0.004
"""

NORMS_CFG = """
[grid]
dim = 2
n = 32

[initial]
seed = 5

[experiment]
count = 40
"""

MAXREG_CFG = """
[grid]
dim = 2
n = 32

[fluid]
p = 4/3

[initial]
seed = 9
amplitude = 1.0

[experiment]
horizons = 1.0, 4.0
n_samples = 256
r = 1.0
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestExitCodes:
    def test_simulate_green(self, tmp_path):
        cfg = write(tmp_path, "sim.cfg", SIM_CFG)
        assert main(["simulate", cfg, "--output-dir", str(tmp_path / "o")]) == 0
        files = sorted(os.listdir(tmp_path / "o"))
        assert files == ["manifest.json", "run.csv", "summary.json"]

    def test_config_error_is_two(self, tmp_path):
        cfg = write(tmp_path, "bad.cfg", "[grid]\ndim = 2\nn = 32\n[fluid]\np = 3\n")
        assert main(["simulate", cfg]) == 2

    def test_missing_file_is_two(self):
        assert main(["simulate", "/nonexistent/path.cfg"]) == 2

    def test_verify_norms_green(self, tmp_path):
        cfg = write(tmp_path, "n.cfg", NORMS_CFG)
        assert main(["verify-norms", cfg,
                     "--output-dir", str(tmp_path / "o")]) == 0
        summary = json.load(open(tmp_path / "o" / "summary.json"))
        assert summary["all_pass"]

    def test_verify_maxreg_green(self, tmp_path):
        cfg = write(tmp_path, "m.cfg", MAXREG_CFG)
        assert main(["verify-maxreg", cfg,
                     "--output-dir", str(tmp_path / "o")]) == 0
        report = json.load(open(tmp_path / "o" / "maxreg.json"))
        assert report["drift"] <= 0.10

    def test_stability_green(self, tmp_path):
        cfg = write(tmp_path, "s.cfg", SIM_CFG.replace(
            "velocity = taylor_green", "velocity = rough").replace(
            "t_end = 0.08", "t_end = 0.06") + "\ndelta_amps = 0.001, 0.0001\nosgood = false\n")
        # delta_amps belongs in [experiment]; append correctly
        cfg2 = write(tmp_path, "s2.cfg", SIM_CFG.replace(
            "t_end = 0.08", "t_end = 0.06\ndelta_amps = 0.001, 0.0001\nosgood = false"))
        assert main(["stability", cfg2,
                     "--output-dir", str(tmp_path / "o")]) == 0

    def test_scaling_check_green(self, tmp_path):
        cfg = write(tmp_path, "sc.cfg", SIM_CFG.replace(
            "density = disk", "density = constant").replace(
            "eps = 0.1", "eps = 0.0"))
        assert main(["scaling-check", cfg,
                     "--output-dir", str(tmp_path / "o")]) == 0
        out = json.load(open(tmp_path / "o" / "scaling.json"))
        assert out["max_discrepancy"] <= 1e-8

    def test_csv_determinism(self, tmp_path):
        cfg = write(tmp_path, "sim.cfg", SIM_CFG)
        main(["simulate", cfg, "--output-dir", str(tmp_path / "a")])
        main(["simulate", cfg, "--output-dir", str(tmp_path / "b")])
        a = (tmp_path / "a" / "run.csv").read_bytes()
        b = (tmp_path / "b" / "run.csv").read_bytes()
        assert a == b

    def test_output_env_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TORUSNS_OUTPUT", str(tmp_path / "root"))
        cfg = write(tmp_path, "n.cfg", NORMS_CFG)
        assert main(["verify-norms", cfg]) == 0
        assert os.path.isdir(tmp_path / "root" / "verify-norms")
