"""
Integration Tests for the Command-Line Front End
================================================

Runs main() in-process; exit codes, report contents and reproducibility.
"""

import pytest
import sys
import os
import json

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from soliton_lab.backend.report_io import read_csv_rows, read_json
from soliton_lab.cli import EXIT_OK, EXIT_USAGE, main


# ============================================================================
# Fixtures
# ============================================================================

@pytest.fixture
def cache_args(tmp_path):
    return ["--cache-dir", str(tmp_path / "cache")]


def data_rows(text, section):
    """Rows of one CSV section printed to stdout."""
    lines = text.splitlines()
    start = lines.index(f"# section: {section}") + 2
    rows = []
    for line in lines[start:]:
        if line.startswith("#"):
            break
        rows.append(line.split(","))
    return rows


# ============================================================================
# verify
# ============================================================================

@pytest.mark.integration
class TestVerifyCommand:
    """Tests for `verify`."""

    def test_soliton_identities_on_cigar(self, tmp_path, cache_args):
        out = str(tmp_path / "lemma1.json")
        code = main(["verify", "--model", "cigar", "--identities", "lemma1", "--points", "50",
                     "--seed", "7", "--json", out] + cache_args)
        assert code == EXIT_OK
        envelope = read_json(out)
        assert len(envelope.reports) == 250
        assert all(r.status == "pass" for r in envelope.reports)
        assert envelope.config["seed"] == "7"

    def test_critical_points_skip_without_failing(self, tmp_path, cache_args):
        out = str(tmp_path / "prop3.json")
        code = main(["verify", "--model", "euclidean", "--identities", "prop3", "--json", out] + cache_args)
        assert code == EXIT_OK
        envelope = read_json(out)
        assert envelope.reports
        assert {r.status for r in envelope.reports} == {"gradient-critical: skipped"}

    def test_unknown_identity_is_usage_error(self, capsys, cache_args):
        code = main(["verify", "--identities", "lemma9"] + cache_args)
        assert code == EXIT_USAGE
        assert "valid ids" in capsys.readouterr().err

    def test_same_config_same_bytes(self, tmp_path, cache_args):
        out = tmp_path / "run.json"
        argv = ["verify", "--model", "cigarxr", "--identities", "soliton,flow_equation",
                "--points", "5", "--seed", "3", "--json", str(out)] + cache_args
        assert main(argv) == EXIT_OK
        first = out.read_bytes()
        assert main(argv) == EXIT_OK
        assert out.read_bytes() == first

    def test_csv_on_stdout(self, capsys, cache_args):
        code = main(["verify", "--model", "cigarxr", "--identities", "soliton", "--points", "3"] + cache_args)
        assert code == EXIT_OK
        rows = data_rows(capsys.readouterr().out, "residuals")
        assert len(rows) == 3

    def test_config_file_with_flag_override(self, tmp_path, cache_args):
        conf = tmp_path / "run.conf"
        conf.write_text("model = cigarxr\nidentities = soliton\npoints = 8\nseed = 2\n", encoding="utf-8")
        out = str(tmp_path / "run.json")
        code = main(["verify", "--config", str(conf), "--points", "4", "--json", out] + cache_args)
        assert code == EXIT_OK
        envelope = read_json(out)
        assert len(envelope.reports) == 4
        assert envelope.config["seed"] == "2"

    def test_bad_config_file(self, tmp_path, capsys, cache_args):
        conf = tmp_path / "bad.conf"
        conf.write_text("colour = blue\n", encoding="utf-8")
        assert main(["verify", "--config", str(conf)] + cache_args) == EXIT_USAGE
        assert "line 1" in capsys.readouterr().err


# ============================================================================
# decay, bryant, report
# ============================================================================

@pytest.mark.integration
class TestOtherCommands:
    """Tests for `decay`, `bryant` and `report`."""

    def test_exponent_table(self, capsys, cache_args):
        code = main(["decay", "--table-exponents", "--a", "1", "--b", "1,1.5,2"] + cache_args)
        assert code == EXIT_OK
        rows = data_rows(capsys.readouterr().out, "exponents")
        assert len(rows) == 3
        assert [row[6] for row in rows] == ["true", "true", "false"]

    def test_decay_fit_on_cigar(self, tmp_path, cache_args):
        out = tmp_path / "decay.json"
        code = main(["decay", "--model", "cigarxr", "--quantity", "R", "--json", str(out)] + cache_args)
        assert code == EXIT_OK
        fits = json.loads(out.read_text(encoding="utf-8"))["fits"]
        assert fits[0]["verdict"] == "not power law"

    def test_negative_radius_is_usage_error(self, capsys, cache_args):
        assert main(["bryant", "--rmax", "-1"] + cache_args) == EXIT_USAGE
        assert "rmax" in capsys.readouterr().err

    def test_bryant_profile(self, tmp_path, capsys):
        out = str(tmp_path / "profile.csv")
        code = main(["bryant", "--rmax", "50", "--tol", "1e-8", "--out", out, "--no-cache"])
        assert code == EXIT_OK
        summary = capsys.readouterr().out.splitlines()
        assert summary[0] == "key,value"
        values = dict(line.split(",", 1) for line in summary[1:])
        assert float(values["hamilton_constant"]) == pytest.approx(1.0, rel=1e-3)
        assert float(values["ode_residual"]) <= float(values["interpolation_residual"])
        assert len(read_csv_rows(out)) > 10

    def test_report_rerender(self, tmp_path, capsys, cache_args):
        report = str(tmp_path / "run.json")
        main(["verify", "--model", "cigarxr", "--identities", "soliton", "--points", "2",
              "--json", report] + cache_args)
        csv_path = str(tmp_path / "run.csv")
        assert main(["report", "--input", report, "--csv", csv_path]) == EXIT_OK
        assert len(read_csv_rows(csv_path)) == 3

    def test_report_needs_input(self, capsys):
        assert main(["report"]) == EXIT_USAGE
        assert "--input" in capsys.readouterr().err
