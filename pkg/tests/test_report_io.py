"""
Unit Tests for Report I/O
=========================

JSON envelopes, the CSV rendering and the Bryant profile table.
"""

import pytest
import sys
import os
import io
import math

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from soliton_lab.backend.bryant import bryant_integrate
from soliton_lab.backend.decay_analysis import exponent_table, fit_power_law
from soliton_lab.backend.lab_exceptions import ConfigError
from soliton_lab.backend.report_io import (
    EXPONENT_COLUMNS,
    PROFILE_COLUMNS,
    RESIDUAL_COLUMNS,
    build_envelope,
    format_real,
    read_csv_rows,
    read_json,
    render_csv,
    write_csv,
    write_json,
    write_profile_csv,
)
from soliton_lab.backend.report_schemas import REPORT_FORMAT
from soliton_lab.backend.verification.residuals import ResidualReport


# ============================================================================
# Fixtures
# ============================================================================

def make_report(identity="soliton", status="pass", rel=1e-12, lhs=1.0, sigma=None):
    return ResidualReport(
        identity=identity,
        model="cigarxr",
        point=(1.0, 0.0, 0.0),
        sigma=sigma,
        lhs=lhs,
        rhs=lhs,
        abs_residual=0.0 if math.isfinite(rel) else math.nan,
        rel_residual=rel,
        fd_step=None,
        order_estimate=None,
        status=status,
        tolerance=1e-8,
        point_index=0,
        details={"B": 0.5, "missing": math.nan},
    )


@pytest.fixture
def envelope():
    r = np.geomspace(1.0, 100.0, 16)
    reports = [
        make_report(),
        make_report("U_evolution", "fail", 0.2, np.array([[1.0, 2.0], [2.0, 3.0]]), sigma=2.0),
        make_report("prop3", "gradient-critical: skipped", math.nan, math.nan, sigma=0.0),
    ]
    return build_envelope(
        "verify",
        {"seed": "0", "model": "cigarxr"},
        reports=reports,
        fits=[fit_power_law(list(zip(r, 3.0 / r)))],
        exponents=exponent_table([1.0], [1.0, 1.5]),
    )


# ============================================================================
# Tests
# ============================================================================

@pytest.mark.unit
class TestEnvelope:
    """Tests for building the report envelope."""

    def test_header(self, envelope):
        assert envelope.format_version == REPORT_FORMAT
        assert list(envelope.config) == ["model", "seed"]

    def test_summary_counts(self, envelope):
        assert envelope.summary["soliton"]["pass"] == 1
        assert envelope.summary["U_evolution"]["fail"] == 1
        assert envelope.summary["prop3"]["skipped"] == 1

    def test_non_finite_values_become_null(self, envelope):
        skipped = envelope.reports[2]
        assert skipped.rel_residual is None
        assert skipped.lhs is None
        assert envelope.reports[0].details == {"B": 0.5, "missing": None}

    def test_component_arrays_are_nested_lists(self, envelope):
        assert envelope.reports[1].lhs == [[1.0, 2.0], [2.0, 3.0]]

    def test_records_for_fits_and_exponents(self, envelope):
        assert envelope.fits[0].exponent == pytest.approx(-1.0)
        assert envelope.fits[0].n == 16
        assert [e.b for e in envelope.exponents] == [1.0, 1.5]


@pytest.mark.unit
class TestJson:
    """Tests for JSON write and read."""

    def test_round_trip(self, envelope, tmp_path):
        path = str(tmp_path / "out" / "report.json")
        write_json(envelope, path)
        restored = read_json(path)
        assert restored == envelope

    def test_same_envelope_same_bytes(self, envelope, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        write_json(envelope, str(first))
        write_json(envelope, str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="Cannot read"):
            read_json(str(tmp_path / "absent.json"))

    def test_not_an_envelope(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"command": 3}', encoding="utf-8")
        with pytest.raises(ConfigError, match=REPORT_FORMAT):
            read_json(str(path))


@pytest.mark.unit
class TestFormatReal:
    """Tests for CSV cell formatting."""

    def test_none_is_empty(self):
        assert format_real(None) == ""

    def test_booleans(self):
        assert format_real(True) == "true"
        assert format_real(False) == "false"

    def test_full_precision(self):
        assert format_real(0.1) == "0.10000000000000001"
        assert float(format_real(1.0 / 3.0)) == 1.0 / 3.0

    def test_integers(self):
        assert format_real(np.int64(7)) == "7"

    def test_arrays_are_flattened(self):
        assert format_real([[1.0, 2.0], [3.0, 4.0]]) == "1;2;3;4"


@pytest.mark.unit
class TestCsv:
    """Tests for the CSV rendering."""

    def test_header_and_sections(self, envelope):
        stream = io.StringIO()
        render_csv(envelope, stream)
        lines = stream.getvalue().splitlines()
        assert lines[0] == f"# format: {REPORT_FORMAT}"
        assert lines[1] == "# command: verify"
        assert "# config: model = cigarxr" in lines
        sections = [line for line in lines if line.startswith("# section:")]
        assert sections == ["# section: residuals", "# section: decay", "# section: exponents"]

    def test_rows_follow_columns(self, envelope, tmp_path):
        path = str(tmp_path / "report.csv")
        write_csv(envelope, path)
        rows = read_csv_rows(path)
        assert rows[0] == list(RESIDUAL_COLUMNS)
        assert len(rows[0]) == len(rows[1])
        assert list(EXPONENT_COLUMNS) in rows
        assert rows[-1][EXPONENT_COLUMNS.index("b")] == "1.5"

    def test_empty_sections_omitted(self):
        stream = io.StringIO()
        render_csv(build_envelope("decay", {}, exponents=exponent_table([1.0], [1.0])), stream)
        assert "# section: residuals" not in stream.getvalue()


@pytest.mark.unit
class TestProfileCsv:
    """Tests for the Bryant profile table."""

    def test_profile_table(self, tmp_path):
        profile = bryant_integrate(10.0, 1e-8)
        path = str(tmp_path / "profile.csv")
        write_profile_csv(profile, path)
        rows = read_csv_rows(path)
        assert rows[0] == list(PROFILE_COLUMNS)
        assert len(rows) == profile.r.size + 1
        radii = [float(row[0]) for row in rows[1:]]
        assert radii == sorted(radii)
