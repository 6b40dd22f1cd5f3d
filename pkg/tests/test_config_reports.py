"""Configuration parsing, validation diagnostics, report emission."""

import json
import os
from fractions import Fraction

import numpy as np
import pytest

from torusns.config import (ConfigError, derive_exponents, parse_config,
                            parse_config_text)
from torusns.reports import ReportSet, emit_reports

MINIMAL = """
[grid]
dim = 2
n = 32
"""


class TestParser:
    def test_minimal(self):
        cfg = parse_config(MINIMAL)
        assert cfg.dim == 2 and cfg.n == 32
        assert cfg.p == Fraction(4, 3) and cfg.q == Fraction(4, 3)

    def test_q_autoderived(self):
        cfg = parse_config(MINIMAL + "[fluid]\np = 3/2\n")
        # 1/q = 3/2 - 2/3 = 5/6
        assert cfg.q == Fraction(6, 5)

    def test_inconsistent_q_rejected_with_relation(self):
        with pytest.raises(ConfigError, match=r"1/p \+ 1/q = 3/2"):
            parse_config(MINIMAL + "[fluid]\np = 4/3\nq = 2/1\n")

    def test_p_range_2d(self):
        with pytest.raises(ConfigError, match=r"p in \(1, 2\)"):
            parse_config(MINIMAL + "[fluid]\np = 5/2\n")

    def test_3d_relation(self):
        p, q = derive_exponents(3, Fraction(2))
        assert q == Fraction(4, 3)
        with pytest.raises(ConfigError, match=r"3/p \+ 2/q = 3"):
            derive_exponents(3, Fraction(2), Fraction(3, 2))

    def test_empty_rejected(self):
        with pytest.raises(ConfigError, match="empty"):
            parse_config("")

    def test_line_numbers_in_errors(self):
        text = "[grid]\ndim = 2\nbroken line\n"
        with pytest.raises(ConfigError, match=":3:"):
            parse_config_text(text, source="cfg")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("[grid]\nn = 8\nn = 16\n")

    def test_value_coercion(self):
        secs = parse_config_text(
            "[a]\nx = 4/3\ny = 2.5\nz = true\nw = hello\nv = 1, 2.5, 3/2\n")
        assert secs["a"]["x"] == Fraction(4, 3)
        assert secs["a"]["y"] == 2.5
        assert secs["a"]["z"] is True
        assert secs["a"]["w"] == "hello"
        assert secs["a"]["v"] == [1, 2.5, Fraction(3, 2)]

    def test_level_sets(self):
        cfg = parse_config(MINIMAL + "[experiment]\nlevel_sets = 1.0:1.1, 0.9:1.0\n")
        assert cfg.level_sets == ((1.0, 1.1), (0.9, 1.0))

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="frobnicate"):
            parse_config(MINIMAL + "[fluid]\nfrobnicate = 1\n")

    def test_eps_bound(self):
        with pytest.raises(ConfigError, match="eps"):
            parse_config(MINIMAL + "[initial]\neps = 1.5\n")


class TestReports:
    def test_emission_and_checksums(self, tmp_path):
        reports = ReportSet()
        reports.add_trace_csv("run", "energy", [0.0, 0.1], [1.0, 0.5])
        reports.add_summary("verdicts", {"gate": {"pass": True, "value": 0.3}})
        manifest = emit_reports(reports, str(tmp_path / "out"),
                                config_echo={"n": 32}, seed=7)
        names = [f["name"] for f in manifest["files"]]
        assert names == ["run.csv", "verdicts.json"]
        csv_text = (tmp_path / "out" / "run.csv").read_text()
        assert csv_text.splitlines()[0] == "time,quantity,value,unit"
        assert "energy" in csv_text

    def test_identical_runs_identical_checksums(self, tmp_path):
        def emit(where):
            reports = ReportSet()
            reports.add_trace_csv("run", "q", [0.0, 0.125], [1 / 3.0, 2 / 7.0])
            reports.add_summary("s", {"x": 0.1 + 0.2})
            return emit_reports(reports, str(tmp_path / where), seed=1)
        m1, m2 = emit("a"), emit("b")
        assert [f["sha256"] for f in m1["files"]] == \
            [f["sha256"] for f in m2["files"]]

    def test_seventeen_digit_round_trip(self, tmp_path):
        value = float(np.pi) * 1e-7
        reports = ReportSet()
        reports.add_trace_csv("run", "v", [0.0], [value])
        emit_reports(reports, str(tmp_path / "out"))
        line = (tmp_path / "out" / "run.csv").read_text().splitlines()[1]
        assert float(line.split(",")[2]) == value

    def test_empty_report_set(self, tmp_path):
        manifest = emit_reports(ReportSet(), str(tmp_path / "out"))
        assert manifest["files"] == []
        assert os.path.exists(tmp_path / "out" / "manifest.json")

    def test_manifest_echo(self, tmp_path):
        reports = ReportSet()
        manifest = emit_reports(reports, str(tmp_path / "out"),
                                config_echo={"p": Fraction(4, 3)}, seed=3,
                                workers=2)
        on_disk = json.load(open(tmp_path / "out" / "manifest.json"))
        assert on_disk["config"]["p"] == "4/3"
        assert on_disk["workers"] == 2
        assert on_disk["seed"] == 3
