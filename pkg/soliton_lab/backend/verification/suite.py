"""
Identity Suite
==============

Runs a set of identities over seeded sample points of one or more models.

Each (model, point) pair is one task; the tasks fan out over a thread
pool and every identity at that point shares one LevelSetProbe. Errors
from the geometry stack are recorded per row with the exception's status
string, so one degenerate point never aborts the suite. Rows are sorted
by (identity, model, point index, σ) after all tasks finish, which keeps
the output independent of completion order.
"""

import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..chart_geometry import ChartPoint
from ..lab_exceptions import LabError, PreconditionError
from ..soliton_models import Region, SolitonModel
from ..surface_calculus import DerivativeReading, LevelSetProbe
from .evolution_identities import (
    EVOLUTION_TOLERANCE,
    verify_A2_evolution,
    verify_H_evolution,
    verify_h_evolution,
)
from .residuals import FAIL, PASS, ResidualReport, skipped_report
from .soliton_identities import (
    LEMMA1_PARTS,
    jet_tolerance,
    verify_flow_equation,
    verify_lemma1,
    verify_principal_difference,
    verify_soliton_equation,
)
from .umbilical_identities import (
    verify_lemma_B,
    verify_lemma_B_reduction,
    verify_lemma_D,
    verify_main_theorem_U0,
    verify_prop3,
    verify_U_evolution,
)

logger = logging.getLogger(__name__)

IDENTITY_IDS = (
    "soliton",
    "lemma1",
    "flow_equation",
    "principal_difference",
    "H_evolution",
    "A2_evolution",
    "h_evolution",
    "U_evolution",
    "lemma_B",
    "lemma_B_reduction",
    "lemma_D",
    "prop3",
    "main_theorem_U0",
)
SIGMA_IDENTITIES = frozenset({"U_evolution", "lemma_B", "lemma_D", "prop3"})
FD_IDENTITIES = frozenset({"H_evolution", "A2_evolution", "h_evolution", "lemma_B_reduction"}) | SIGMA_IDENTITIES
ERROR_STATUS = LabError.status


@dataclass
class IdentitySuite:
    """What to verify, where, and how strictly."""

    identities: List[str] = field(default_factory=list)

    # Point sampler
    points: int = 10
    seed: int = 0
    region: Optional[Region] = None  # model default when None
    fixed_points: Tuple[Tuple[float, ...], ...] = ()  # replaces sampling when given

    sigmas: Tuple[float, ...] = (0.0,)

    # Finite differences
    step: Optional[float] = None  # curvature-scaled default when None
    reading: DerivativeReading = DerivativeReading.INTRINSIC

    tolerances: Dict[str, float] = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        unknown = [i for i in self.identities if i not in IDENTITY_IDS]
        if unknown:
            raise PreconditionError(
                f"Unknown identity ids {unknown}; valid ids: {', '.join(IDENTITY_IDS)}"
            )
        unknown = [i for i in self.tolerances if i not in IDENTITY_IDS]
        if unknown:
            raise PreconditionError(f"Tolerances given for unknown identities {unknown}")
        if self.points < 0:
            raise PreconditionError(f"points must be >= 0, got {self.points}")
        if self.step is not None and self.step <= 0:
            raise PreconditionError(f"step must be positive, got {self.step}")
        if self.workers < 1:
            raise PreconditionError(f"workers must be >= 1, got {self.workers}")
        if any(t <= 0 for t in self.tolerances.values()):
            raise PreconditionError("tolerances must be positive")
        if not self.sigmas and any(i in SIGMA_IDENTITIES for i in self.identities):
            raise PreconditionError("σ-dependent identities need at least one σ")

    def tolerance_for(self, identity: str, model: SolitonModel) -> float:
        if identity in self.tolerances:
            return self.tolerances[identity]
        return EVOLUTION_TOLERANCE if identity in FD_IDENTITIES else jet_tolerance(model)

    def points_for(self, model: SolitonModel) -> List[ChartPoint]:
        if self.fixed_points:
            return [ChartPoint(tuple(c)) for c in self.fixed_points]
        rng = np.random.default_rng(self.seed)
        return model.sample_points(rng, self.points, self.region)


class _PointTask:
    """Every requested identity at one point; the probe is built on first use."""

    def __init__(self, model: SolitonModel, p: ChartPoint, index: int, suite: IdentitySuite):
        self.model = model
        self.p = p
        self.index = index
        self.suite = suite
        self._probe: Optional[LevelSetProbe] = None
        self._probe_error: Optional[LabError] = None

    def probe(self) -> LevelSetProbe:
        if self._probe_error is not None:
            raise self._probe_error
        if self._probe is None:
            try:
                self._probe = LevelSetProbe(self.model, self.p)
            except LabError as e:
                self._probe_error = e
                raise
        return self._probe

    def _row(self, identity: str, run: Callable[[], ResidualReport], sigma: Optional[float] = None) -> ResidualReport:
        suite_id = "lemma1" if identity.startswith("lemma1_") else identity
        tolerance = self.suite.tolerance_for(suite_id, self.model)
        try:
            report = run()
        except LabError as e:
            report = skipped_report(identity, self.model, self.p.coords, e, tolerance, sigma)
        except Exception as e:
            logger.error(f"{identity} on {self.model.name} at {self.p.coords} failed: {type(e).__name__}: {e}")
            report = skipped_report(identity, self.model, self.p.coords, LabError(str(e)), tolerance, sigma)
        report.point_index = self.index
        return report

    def run(self) -> List[ResidualReport]:
        model, p, suite = self.model, self.p, self.suite
        step, reading = suite.step, suite.reading
        tol = lambda identity: suite.tolerance_for(identity, model)
        rows: List[ResidualReport] = []

        for identity in suite.identities:
            if identity == "soliton":
                rows.append(self._row(identity, lambda: verify_soliton_equation(model, p, tol("soliton"))))
            elif identity == "lemma1":
                for part in LEMMA1_PARTS:
                    rows.append(self._row(f"lemma1_{part}",
                                          lambda part=part: verify_lemma1(model, p, part, tol("lemma1"))))
            elif identity == "flow_equation":
                rows.append(self._row(identity, lambda: verify_flow_equation(
                    model, p, self.probe().frame, tol(identity))))
            elif identity == "principal_difference":
                rows.append(self._row(identity, lambda: verify_principal_difference(
                    model, p, self.probe().frame, tol(identity))))
            elif identity == "main_theorem_U0":
                rows.append(self._row(identity, lambda: verify_main_theorem_U0(
                    model, p, self.probe().frame, tol(identity))))
            elif identity == "H_evolution":
                rows.append(self._row(identity, lambda: verify_H_evolution(
                    model, p, step, self.probe(), reading, tolerance=tol(identity))))
            elif identity == "A2_evolution":
                rows.append(self._row(identity, lambda: verify_A2_evolution(
                    model, p, step, self.probe(), reading, tolerance=tol(identity))))
            elif identity == "h_evolution":
                rows.append(self._row(identity, lambda: verify_h_evolution(
                    model, p, step, self.probe(), reading, tolerance=tol(identity))))
            elif identity == "lemma_B_reduction":
                rows.append(self._row(identity, lambda: verify_lemma_B_reduction(
                    model, p, step, self.probe(), tol(identity))))
            else:
                verify = _SIGMA_RUNNERS[identity]
                for sigma in suite.sigmas:
                    rows.append(self._row(identity, lambda sigma=sigma: verify(
                        model, p, sigma, step, self.probe(), reading, tol(identity)), sigma))
        return rows


def _lemma_B_runner(model, p, sigma, step, probe, reading, tolerance):
    # ⟨∇H, ∇f⟩ and the flow derivative are ambient in every reading
    return verify_lemma_B(model, p, sigma, step, probe, tolerance)


_SIGMA_RUNNERS = {
    "U_evolution": verify_U_evolution,
    "lemma_B": _lemma_B_runner,
    "lemma_D": verify_lemma_D,
    "prop3": verify_prop3,
}


def run_suite(models: Sequence[SolitonModel], suite: IdentitySuite) -> List[ResidualReport]:
    """
    Evaluate the suite on every model. Deterministic for a fixed seed;
    never raises for per-point failures.

    Returns:
        Reports sorted by (identity, model, point index, σ)
    """
    logger.info("=" * 60)
    logger.info("IDENTITY SUITE")
    logger.info("=" * 60)

    if not suite.identities:
        logger.info("No identities requested")
        return []

    tasks: List[_PointTask] = []
    for model in models:
        try:
            points = suite.points_for(model)
        except LabError as e:
            logger.warning(f"Cannot sample points on {model.name}: {e}")
            continue
        logger.info(f"  {model.name}: {len(points)} points, identities {suite.identities}")
        tasks.extend(_PointTask(model, p, i, suite) for i, p in enumerate(points))

    reports: List[ResidualReport] = []
    if suite.workers == 1:
        for task in tasks:
            reports.extend(task.run())
    else:
        with ThreadPoolExecutor(max_workers=suite.workers) as pool:
            for rows in pool.map(lambda t: t.run(), tasks):
                reports.extend(rows)

    reports.sort(key=lambda r: r.sort_key())
    summary = summarize(reports)
    logger.info("=" * 60)
    logger.info("IDENTITY SUITE COMPLETE")
    logger.info("=" * 60)
    logger.info(f"{summary.total} rows: {summary.passed} pass, {summary.failed} fail, "
                f"{summary.skipped} skipped, {summary.errors} errors")
    return reports


@dataclass
class SuiteSummary:
    """Pass/fail/skip counts per identity and overall."""

    counts: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def _total(self, key: str) -> int:
        return sum(c.get(key, 0) for c in self.counts.values())

    @property
    def passed(self) -> int:
        return self._total(PASS)

    @property
    def failed(self) -> int:
        return self._total(FAIL)

    @property
    def errors(self) -> int:
        return self._total(ERROR_STATUS)

    @property
    def skipped(self) -> int:
        return self._total("skipped")

    @property
    def total(self) -> int:
        return self.passed + self.failed + self.skipped + self.errors

    @property
    def all_passed(self) -> bool:
        return self.failed == 0 and self.errors == 0


def summarize(reports: Sequence[ResidualReport]) -> SuiteSummary:
    """Count rows per identity; skipped rows keep their reason out of the counts."""
    counts: Dict[str, Dict[str, int]] = defaultdict(lambda: {PASS: 0, FAIL: 0, "skipped": 0, ERROR_STATUS: 0})
    for report in reports:
        if report.status in (PASS, FAIL, ERROR_STATUS):
            counts[report.identity][report.status] += 1
        else:
            counts[report.identity]["skipped"] += 1
    return SuiteSummary(dict(counts))
