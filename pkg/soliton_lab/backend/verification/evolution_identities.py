"""
Evolution Identities
====================

Evolution of H, |A|^2 and h_ij under the level set flow with speed λH
along ν. Left sides are flow derivatives (ambient stencil, or the
subnormal chart for h_ij); right sides are assembled from Σ-geodesic
derivatives and ambient curvature in the adapted frame.

With ``extrinsic_only`` the weight is λ = 1/(H|∇f|) and the ambient
curvature terms (R_νν, B) are dropped; this is the form that closes on
level sets of non-soliton potentials in flat space.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from ..chart_geometry import ChartPoint
from ..level_set_geometry import (
    MEAN_CURVATURE,
    NORM_A_SQ,
    WEIGHT,
    GeometricField,
    LevelSetFrame,
)
from ..soliton_models import SolitonModel
from ..surface_calculus import DerivativeReading, LevelSetProbe
from .frame_terms import TermSheet, frame_curvature
from .residuals import ResidualReport, Sides, fd_report

logger = logging.getLogger(__name__)

EVOLUTION_TOLERANCE = 1e-3


def _extrinsic_weight(frame: LevelSetFrame) -> float:
    frame.require_mean_curvature()
    return 1.0 / (frame.H * frame.grad_norm)


EXTRINSIC_WEIGHT = GeometricField.custom(_extrinsic_weight, "lambda_extrinsic")


def weights(frame: LevelSetFrame, extrinsic_only: bool) -> Tuple[GeometricField, float, float]:
    """(λ field, λ at the point, R_νν as used by the identity)."""
    if extrinsic_only:
        return EXTRINSIC_WEIGHT, _extrinsic_weight(frame), 0.0
    return WEIGHT, frame.require_lambda(), frame.R_nunu


def probe_for(model: SolitonModel, p: ChartPoint, probe: Optional[LevelSetProbe]) -> LevelSetProbe:
    return probe if probe is not None else LevelSetProbe(model, p)


# ============================================================================
# Mean curvature
# ============================================================================

def H_evolution_sides(probe: LevelSetProbe, step: float,
                      reading: DerivativeReading = DerivativeReading.INTRINSIC,
                      extrinsic_only: bool = False) -> Sides:
    """∂_t H = λ(ΔH + H(|A|^2 + R_νν)) + HΔλ + 2⟨∇λ, ∇H⟩."""
    sheet = TermSheet(probe, step, reading)
    frame = probe.frame
    lam_field, lam, r_nunu = weights(frame, extrinsic_only)
    terms = {
        "lambda_laplacian_H": lam * sheet.lap(MEAN_CURVATURE),
        "reaction": lam * frame.H * (frame.A2 + r_nunu),
        "H_laplacian_lambda": frame.H * sheet.lap(lam_field),
        "gradient_coupling": 2.0 * sheet.inner(lam_field, MEAN_CURVATURE),
    }
    return Sides(sheet.flow(MEAN_CURVATURE), sum(terms.values()), terms)


def verify_H_evolution(
    model: SolitonModel,
    p: ChartPoint,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
    reading: DerivativeReading = DerivativeReading.INTRINSIC,
    extrinsic_only: bool = False,
    tolerance: float = EVOLUTION_TOLERANCE,
) -> ResidualReport:
    probe = probe_for(model, p, probe)
    return fd_report(
        "H_evolution", model, p.coords,
        lambda h: H_evolution_sides(probe, h, reading, extrinsic_only),
        step or probe.default_step, tolerance,
    )


# ============================================================================
# Norm of the second fundamental form
# ============================================================================

def A2_evolution_sides(probe: LevelSetProbe, step: float,
                       reading: DerivativeReading = DerivativeReading.INTRINSIC,
                       extrinsic_only: bool = False) -> Sides:
    """
    ∂_t|A|^2 = λ(Δ|A|^2 - 2|∇A|^2 + 2|A|^2(|A|^2 + R_νν) - B)
               + 2h^ij(Hλ_ij + 2H_iλ_j).
    """
    sheet = TermSheet(probe, step, reading)
    frame = probe.frame
    lam_field, lam, r_nunu = weights(frame, extrinsic_only)
    grad_A_sq = float(np.sum(sheet.shape_gradient() ** 2))
    B = 0.0 if extrinsic_only else frame_curvature(frame).b_term(frame.shape_matrix())
    terms = {
        "lambda_laplacian_A2": lam * sheet.lap(NORM_A_SQ),
        "gradient_A_sq": -2.0 * lam * grad_A_sq,
        "reaction": 2.0 * lam * frame.A2 * (frame.A2 + r_nunu),
        "B": -lam * B,
        "weight_coupling": 2.0 * sheet.weight_coupling(lam_field),
    }
    return Sides(sheet.flow(NORM_A_SQ), sum(terms.values()), terms,
                 details={"B": B, "grad_A_sq": grad_A_sq})


def verify_A2_evolution(
    model: SolitonModel,
    p: ChartPoint,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
    reading: DerivativeReading = DerivativeReading.INTRINSIC,
    extrinsic_only: bool = False,
    tolerance: float = EVOLUTION_TOLERANCE,
) -> ResidualReport:
    probe = probe_for(model, p, probe)
    return fd_report(
        "A2_evolution", model, p.coords,
        lambda h: A2_evolution_sides(probe, h, reading, extrinsic_only),
        step or probe.default_step, tolerance,
    )


# ============================================================================
# Second fundamental form, component-wise
# ============================================================================

def h_evolution_sides(probe: LevelSetProbe, step: float,
                      reading: DerivativeReading = DerivativeReading.INTRINSIC) -> Sides:
    """
    ∂_t h_ij in subnormal coordinates against
    λ(Δh - 2H h^2 + h(|A|^2 + R_νν) - (Xh + hX) + 2 h·Rm + G)_ij
    + Hλ_ij + H_iλ_j + H_jλ_i.
    """
    frame = probe.frame
    chart = probe.chart(4.0 * step)
    delta = step * frame.grad_norm
    t = frame.level
    h_plus = chart.shape_components((t + delta, 0.0, 0.0), step)
    h_minus = chart.shape_components((t - delta, 0.0, 0.0), step)
    lhs = (h_plus - h_minus) / (2.0 * delta)

    sheet = TermSheet(probe, step, reading)
    lam = frame.require_lambda()
    h = frame.shape_matrix()
    laplacian = sheet.shape_laplacian()
    reaction = -2.0 * frame.H * (h @ h) + h * (frame.A2 + frame.R_nunu)
    curvature = frame_curvature(frame).shape_curvature_terms(h)
    H_grad = sheet.tangent_grad(MEAN_CURVATURE)
    lam_grad = sheet.tangent_grad(WEIGHT)
    coupling = frame.H * sheet.hess(WEIGHT) + np.outer(H_grad, lam_grad) + np.outer(lam_grad, H_grad)
    rhs = lam * (laplacian + reaction + curvature) + coupling

    terms = {
        "lambda_laplacian_h": float(np.max(np.abs(lam * laplacian))),
        "reaction": float(np.max(np.abs(lam * reaction))),
        "curvature": float(np.max(np.abs(lam * curvature))),
        "coupling": float(np.max(np.abs(coupling))),
    }
    details = {
        "trace_lhs": float(np.trace(lhs)),
        "metric_correction": 2.0 * lam * frame.H * frame.A2,
    }
    return Sides(lhs, rhs, terms, details)


def verify_h_evolution(
    model: SolitonModel,
    p: ChartPoint,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
    reading: DerivativeReading = DerivativeReading.INTRINSIC,
    tolerance: float = EVOLUTION_TOLERANCE,
) -> ResidualReport:
    """Component-wise (2x2) report; needs a non-umbilical point for the chart axes."""
    probe = probe_for(model, p, probe)
    probe.frame.require_principal("subnormal chart axes")
    return fd_report(
        "h_evolution", model, p.coords,
        lambda h: h_evolution_sides(probe, h, reading),
        step or probe.default_step, tolerance,
    )


def h_evolution_trace_gap(
    model: SolitonModel,
    p: ChartPoint,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
) -> float:
    """
    |tr ∂_t h + 2λH|A|^2 - ∂_t H|: the coordinate trace of the h_ij report
    against the flow derivative of H (the metric evolves by -2λH h).
    """
    probe = probe_for(model, p, probe)
    step = step or probe.default_step
    h_report = verify_h_evolution(model, p, step, probe)
    H_report = verify_H_evolution(model, p, step, probe)
    traced = h_report.details["trace_lhs"] + h_report.details["metric_correction"]
    gap = abs(traced - float(H_report.lhs))
    logger.debug(f"h/H trace gap on {model.name} at {p.coords}: {gap:.3e}")
    return gap
