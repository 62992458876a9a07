"""
Report I/O
==========

Converts residual reports, decay fits and exponent rows to pydantic
records and writes them as a JSON envelope or a flat CSV. Reports carry no
timestamps, so the same configuration reproduces the same bytes.
"""

import csv
import logging
import math
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np
from pydantic import ValidationError

from .bryant import PROFILE_FORMAT, BryantProfile
from .decay_analysis import DecayFit, ExponentRow
from .lab_exceptions import ConfigError
from .report_schemas import REPORT_FORMAT, DecayRecord, ExponentRecord, ReportEnvelope, ResidualRecord
from .verification.residuals import ResidualReport
from .verification.suite import summarize

logger = logging.getLogger(__name__)

RESIDUAL_COLUMNS = ("identity", "model", "point_index", "point", "sigma", "lhs", "rhs", "abs_residual",
                    "rel_residual", "fd_step", "order_estimate", "status", "tolerance")
DECAY_COLUMNS = ("quantity", "model", "r_min", "r_max", "n", "exponent", "constant", "r2",
                 "residual_spread", "slope_drift", "verdict", "predicted_exponent", "consistent", "reason")
EXPONENT_COLUMNS = ("a", "b", "sigma", "e1", "e2", "effective", "asymptotically_round",
                    "order_I", "order_II", "order_III")
PROFILE_COLUMNS = ("r", "phi", "dphi", "f", "df", "R", "C0_check")


def _finite(value: Any) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _component(value: Any):
    if isinstance(value, np.ndarray) and value.ndim > 0:
        return value.tolist()
    return _finite(value)


# ============================================================================
# Records
# ============================================================================

def residual_record(report: ResidualReport) -> ResidualRecord:
    lhs = _component(np.asarray(report.lhs, dtype=float))
    rhs = _component(np.asarray(report.rhs, dtype=float))
    return ResidualRecord(
        identity=report.identity,
        model=report.model,
        point=[float(c) for c in report.point],
        point_index=report.point_index,
        sigma=report.sigma,
        lhs=lhs,
        rhs=rhs,
        abs_residual=_finite(report.abs_residual),
        rel_residual=_finite(report.rel_residual),
        fd_step=report.fd_step,
        order_estimate=_finite(report.order_estimate),
        status=report.status,
        tolerance=report.tolerance,
        details={k: _finite(v) for k, v in sorted(report.details.items())},
    )


def decay_record(fit: DecayFit) -> DecayRecord:
    return DecayRecord(
        quantity=fit.quantity,
        model=fit.model,
        r_min=fit.r_min,
        r_max=fit.r_max,
        n=fit.n_samples,
        exponent=_finite(fit.exponent),
        constant=_finite(fit.constant),
        r2=_finite(fit.r_squared),
        residual_spread=_finite(fit.residual_spread),
        slope_drift=_finite(fit.slope_drift),
        verdict=fit.verdict,
        predicted_exponent=fit.predicted_exponent,
        consistent=fit.consistent,
        reason=fit.reason,
    )


def exponent_record(row: ExponentRow) -> ExponentRecord:
    return ExponentRecord(**asdict(row))


def build_envelope(
    command: str,
    config: Dict[str, str],
    reports: Sequence[ResidualReport] = (),
    fits: Sequence[DecayFit] = (),
    exponents: Sequence[ExponentRow] = (),
) -> ReportEnvelope:
    return ReportEnvelope(
        command=command,
        config=dict(sorted(config.items())),
        summary=summarize(reports).counts if reports else {},
        reports=[residual_record(r) for r in reports],
        fits=[decay_record(f) for f in fits],
        exponents=[exponent_record(e) for e in exponents],
    )


# ============================================================================
# JSON
# ============================================================================

def write_json(envelope: ReportEnvelope, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(envelope.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote JSON report to {path}")


def read_json(path: str) -> ReportEnvelope:
    """
    Raises:
        ConfigError: file missing or not a valid report envelope
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read report {path}: {e}")
    try:
        return ReportEnvelope.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"{path} is not a {REPORT_FORMAT} envelope: {e.error_count()} validation errors")


# ============================================================================
# CSV
# ============================================================================

def format_real(value: Any) -> str:
    """17 significant digits; arrays flattened and joined by ';'; None as empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple, np.ndarray)):
        flat = np.asarray(value, dtype=float).ravel()
        return ";".join(format_real(v) for v in flat)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_section(writer, name: str, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> None:
    writer.writerow([f"# section: {name}"])
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_real(row.get(c)) for c in columns])


def render_csv(envelope: ReportEnvelope, stream: TextIO) -> None:
    """Header comments (format, config echo), then one table per non-empty section."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([f"# format: {envelope.format_version}"])
    writer.writerow([f"# command: {envelope.command}"])
    for key, value in envelope.config.items():
        writer.writerow([f"# config: {key} = {value}"])
    if envelope.reports:
        _write_section(writer, "residuals", RESIDUAL_COLUMNS,
                       (r.model_dump() for r in envelope.reports))
    if envelope.fits:
        _write_section(writer, "decay", DECAY_COLUMNS, (f.model_dump() for f in envelope.fits))
    if envelope.exponents:
        _write_section(writer, "exponents", EXPONENT_COLUMNS,
                       (e.model_dump() for e in envelope.exponents))


def write_csv(envelope: ReportEnvelope, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        render_csv(envelope, fh)
    logger.info(f"Wrote CSV report to {path}")


def read_csv_rows(path: str) -> List[List[str]]:
    """Data rows of a CSV report (comment lines dropped)."""
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh) if row and not row[0].startswith("#")]


def write_profile_csv(profile: BryantProfile, path: str) -> None:
    """Bryant profile table (r, phi, phi', f, f', R, R + |∇f|^2)."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"# format: {PROFILE_FORMAT}"])
        writer.writerow([f"# hamilton_constant: {format_real(profile.hamilton_constant)}"])
        writer.writerow([f"# tolerance: {format_real(profile.tolerance)}"])
        writer.writerow(PROFILE_COLUMNS)
        for row in profile.to_rows():
            writer.writerow([format_real(v) for v in row])
    logger.info(f"Wrote Bryant profile ({profile.r.size} rows) to {path}")
