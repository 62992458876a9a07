"""
Residual Reports
================

The ResidualReport record and the helpers that turn two sides of an
identity into one: residual measure, pass/fail status, Richardson-
extrapolated sides, convergence order from step halving, and skipped
rows for points where an identity does not apply.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from ..lab_exceptions import LabError
from ..soliton_models import SolitonModel

logger = logging.getLogger(__name__)

Value = Union[float, np.ndarray]

PASS = "pass"
FAIL = "fail"

# res(2h) below this fraction of the identity scale gives no order estimate.
ORDER_NOISE_FLOOR = 1e-6


@dataclass
class ResidualReport:
    """Outcome of one identity at one point (and one σ)."""

    identity: str
    model: str
    point: Tuple[float, ...]
    sigma: Optional[float]
    lhs: Value
    rhs: Value
    abs_residual: float
    rel_residual: float
    fd_step: Optional[float]
    order_estimate: Optional[float]
    status: str
    tolerance: float
    point_index: int = -1
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    @property
    def skipped(self) -> bool:
        return self.status not in (PASS, FAIL)

    def sort_key(self) -> Tuple[str, str, int, float]:
        sigma = -math.inf if self.sigma is None else self.sigma
        return (self.identity, self.model, self.point_index, sigma)


@dataclass
class Sides:
    """Both sides of an identity with the terms that were summed."""

    lhs: Value
    rhs: Value
    terms: Dict[str, float] = field(default_factory=dict)
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def term_scale(self) -> float:
        if not self.terms:
            return 0.0
        return max(abs(v) for v in self.terms.values())

    @property
    def side_scale(self) -> float:
        return max(float(np.max(np.abs(np.asarray(self.lhs)))), float(np.max(np.abs(np.asarray(self.rhs)))))

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(np.asarray(self.lhs) - np.asarray(self.rhs))))


def hamilton_scale(model: SolitonModel) -> float:
    c0 = model.hamilton_constant
    return max(abs(c0), 1.0) if math.isfinite(c0) else 1.0


def residual_measure(lhs: Value, rhs: Value, c0_scale: float = 1.0) -> Tuple[float, float]:
    """
    (abs, rel) residual; rel = |lhs - rhs| / max(|lhs|, |rhs|, 1e-6 * C0 scale),
    maxima taken over components.
    """
    lhs_arr = np.asarray(lhs, dtype=float)
    rhs_arr = np.asarray(rhs, dtype=float)
    abs_res = float(np.max(np.abs(lhs_arr - rhs_arr)))
    denom = max(float(np.max(np.abs(lhs_arr))), float(np.max(np.abs(rhs_arr))), 1e-6 * c0_scale)
    return abs_res, abs_res / denom


def term_scaled_residual(lhs: Value, rhs: Value, term_scale: float, c0_scale: float = 1.0) -> float:
    """|lhs - rhs| against the largest summed term as well; reported, never graded."""
    abs_res, rel = residual_measure(lhs, rhs, c0_scale)
    if term_scale <= 0.0 or abs_res == 0.0:
        return rel
    return min(rel, abs_res / term_scale)


def convergence_order(coarse: float, fine: float, scale: float) -> Optional[float]:
    """
    log2(res(2h)/res(h)); None when res(2h) is within ORDER_NOISE_FLOOR of
    the identity's scale, where round-off in the stencils decides the ratio.
    """
    if not math.isfinite(coarse) or abs(coarse) <= ORDER_NOISE_FLOOR * max(1.0, scale):
        return None
    if fine == 0.0:
        return None
    return math.log2(abs(coarse) / abs(fine))


def richardson(coarse: Value, fine: Value) -> Value:
    """(4 V(h) - V(2h))/3; cancels the h^2 term of a central difference."""
    out = (4.0 * np.asarray(fine, dtype=float) - np.asarray(coarse, dtype=float)) / 3.0
    return float(out) if out.ndim == 0 else out


def _is_real(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def extrapolated_sides(evaluate: Callable[[float], Sides], step: float) -> Tuple[Sides, Sides, Sides]:
    """Sides at 2*step and at step, and their Richardson combination."""
    coarse = evaluate(2.0 * step)
    fine = evaluate(step)
    terms = {k: richardson(coarse.terms[k], v) for k, v in fine.terms.items() if k in coarse.terms}
    details = {}
    for key, value in fine.details.items():
        other = coarse.details.get(key)
        if _is_real(value) and _is_real(other):
            details[key] = richardson(other, value)
        else:
            details[key] = value
    combined = Sides(richardson(coarse.lhs, fine.lhs), richardson(coarse.rhs, fine.rhs), terms, details)
    return coarse, fine, combined


def status_for(rel: float, tolerance: float) -> str:
    return PASS if rel <= tolerance else FAIL


def build_report(
    identity: str,
    model: SolitonModel,
    point: Tuple[float, ...],
    sides: Sides,
    tolerance: float,
    sigma: Optional[float] = None,
    fd_step: Optional[float] = None,
    order_estimate: Optional[float] = None,
) -> ResidualReport:
    scale = hamilton_scale(model)
    abs_res, rel = residual_measure(sides.lhs, sides.rhs, scale)
    details = dict(sides.details)
    if sides.terms:
        details.setdefault("rel_residual_term_scaled",
                           term_scaled_residual(sides.lhs, sides.rhs, sides.term_scale, scale))
    return ResidualReport(
        identity=identity,
        model=model.name,
        point=tuple(point),
        sigma=sigma,
        lhs=sides.lhs,
        rhs=sides.rhs,
        abs_residual=abs_res,
        rel_residual=rel,
        fd_step=fd_step,
        order_estimate=order_estimate,
        status=status_for(rel, tolerance),
        tolerance=tolerance,
        details=details,
    )


def fd_report(
    identity: str,
    model: SolitonModel,
    point: Tuple[float, ...],
    evaluate: Callable[[float], Sides],
    step: float,
    tolerance: float,
    sigma: Optional[float] = None,
) -> ResidualReport:
    """
    Evaluate an identity at 2*step and step. The graded sides are the
    Richardson combination of the two; the order estimate and the raw
    relative residuals come from the pair itself.
    """
    coarse, fine, sides = extrapolated_sides(evaluate, step)
    order = convergence_order(coarse.residual, fine.residual, max(coarse.side_scale, coarse.term_scale))
    if order is None:
        logger.debug(f"{identity} on {model.name}: residual at noise floor, no order estimate")
    report = build_report(identity, model, point, sides, tolerance, sigma, step, order)
    scale = hamilton_scale(model)
    report.details.setdefault("rel_residual_at_step", residual_measure(fine.lhs, fine.rhs, scale)[1])
    report.details.setdefault("rel_residual_double_step", residual_measure(coarse.lhs, coarse.rhs, scale)[1])
    return report


def skipped_report(
    identity: str,
    model: SolitonModel,
    point: Tuple[float, ...],
    error: LabError,
    tolerance: float,
    sigma: Optional[float] = None,
) -> ResidualReport:
    """Row for a point where the identity does not apply."""
    logger.debug(f"{identity} on {model.name} at {point}: {error.status} ({error})")
    nan = float("nan")
    return ResidualReport(
        identity=identity,
        model=model.name,
        point=tuple(point),
        sigma=sigma,
        lhs=nan,
        rhs=nan,
        abs_residual=nan,
        rel_residual=nan,
        fd_step=None,
        order_estimate=None,
        status=error.status,
        tolerance=tolerance,
    )
