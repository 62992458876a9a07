"""
Umbilical Ratio Identities
==========================

Identities for U_σ = S^2/H^(2+σ) at non-umbilical points:

1. Evolution of U_σ with the curvature term B and the weight term D
2. B rewritten through ∂_t U_σ, C0, ⟨∇H, ∇f⟩ and L22
3. D rewritten through principal-direction derivatives of λ and H
4. The combined equation, with its Θ-form after moving λ|∇f|^2 ∂_t U_σ
5. U_0 from the Ricci difference (R22 - R11)^2/(|∇f|^2 H^2)
"""

import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from ..chart_geometry import ChartPoint
from ..lab_exceptions import MeanCurvatureDegenerateError, UnsupportedModelError
from ..level_set_geometry import (
    DEFAULT_CONFIG,
    MEAN_CURVATURE,
    PRINCIPAL_GAP_SQ,
    WEIGHT,
    GeometricField,
    LevelSetFrame,
    frame_at,
)
from ..soliton_models import SolitonModel
from ..surface_calculus import DerivativeReading, LevelSetProbe
from .evolution_identities import (
    EVOLUTION_TOLERANCE,
    A2_evolution_sides,
    H_evolution_sides,
    probe_for,
)
from .frame_terms import TermSheet, frame_curvature
from .residuals import (
    ResidualReport,
    Sides,
    build_report,
    extrapolated_sides,
    fd_report,
    hamilton_scale,
    residual_measure,
)
from .soliton_identities import jet_tolerance

logger = logging.getLogger(__name__)


def _checked_frame(frame: LevelSetFrame, what: str) -> LevelSetFrame:
    frame.require_principal(what)
    frame.require_mean_curvature()
    return frame


def _hamilton_constant(model: SolitonModel) -> float:
    if not math.isfinite(model.hamilton_constant):
        raise UnsupportedModelError(model.name, "identities involving C0")
    return model.hamilton_constant


def gradient_square(H: float, H_grad: np.ndarray, h: np.ndarray, shape_gradient: np.ndarray) -> float:
    """|∇_i H h_jk - H ∇_i h_jk|^2."""
    tensor = np.einsum("i,jk->ijk", H_grad, h) - H * shape_gradient
    return float(np.sum(tensor ** 2))


def weight_term_D(sheet: TermSheet) -> float:
    """D = h^ij(Hλ_ij + 2H_iλ_j) - H(HΔλ + 2⟨∇H, ∇λ⟩)/2, on tangential derivatives."""
    frame = sheet.frame
    H = frame.H
    lam_hess = sheet.hess(WEIGHT)
    H_grad = sheet.tangent_grad(MEAN_CURVATURE)
    lam_grad = sheet.tangent_grad(WEIGHT)
    return sheet.weight_coupling() - 0.5 * H * (H * float(np.trace(lam_hess)) + 2.0 * float(H_grad @ lam_grad))


# ============================================================================
# Evolution of U_σ
# ============================================================================

def U_evolution_sides(probe: LevelSetProbe, step: float, sigma: float,
                      reading: DerivativeReading = DerivativeReading.INTRINSIC) -> Sides:
    sheet = TermSheet(probe, step, reading)
    frame = _checked_frame(probe.frame, "umbilical ratio evolution")
    lam = frame.require_lambda()
    U_field = GeometricField.u_sigma(sigma)
    H = frame.H
    U = frame.umbilical_ratio(sigma)
    power = 2.0 + sigma
    h = frame.shape_matrix()

    G2 = gradient_square(H, sheet.tangent_grad(MEAN_CURVATURE), h, sheet.shape_gradient())
    B = frame_curvature(frame).b_term(h)
    D = weight_term_D(sheet)
    terms = {
        "lambda_laplacian_U": lam * sheet.lap(U_field),
        "gradient_coupling_U": lam * 2.0 * (1.0 + sigma) / H * sheet.inner(MEAN_CURVATURE, U_field),
        "gradient_square": -2.0 * lam * G2 / H ** (4.0 + sigma),
        "gradient_H_sq": lam * sigma * (1.0 + sigma) * sheet.inner(MEAN_CURVATURE, MEAN_CURVATURE) / H ** 2 * U,
        "reaction": -lam * sigma * (frame.A2 + frame.R_nunu) * U,
        "B": -lam * B / H ** power,
        "weight_laplacian": -power * (sheet.lap(WEIGHT) + 2.0 / H * sheet.inner(MEAN_CURVATURE, WEIGHT)) * U,
        "D": 2.0 * D / H ** power,
    }
    return Sides(sheet.flow(U_field), sum(terms.values()), terms, details={"B": B, "D": D, "G2": G2})


def verify_U_evolution(
    model: SolitonModel,
    p: ChartPoint,
    sigma: float,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
    reading: DerivativeReading = DerivativeReading.INTRINSIC,
    tolerance: float = EVOLUTION_TOLERANCE,
) -> ResidualReport:
    probe = probe_for(model, p, probe)
    _checked_frame(probe.frame, "umbilical ratio evolution")
    return fd_report(
        "U_evolution", model, p.coords,
        lambda h: U_evolution_sides(probe, h, sigma, reading),
        step or probe.default_step, tolerance, sigma,
    )


# ============================================================================
# The curvature term B
# ============================================================================

def _L22_readings(frame: LevelSetFrame) -> Tuple[float, float]:
    """(reduced (e2R)^2 - (e1R)^2, full 2(e2R)^2 - |∇R|^2)."""
    e1R, e2R, nuR = frame.curvature_gradient_frame()
    return e2R ** 2 - e1R ** 2, 2.0 * e2R ** 2 - (e1R ** 2 + e2R ** 2 + nuR ** 2)


def lemma_B_reduction_sides(probe: LevelSetProbe, step: float) -> Sides:
    """
    2 h^ij G_ij = |∇f|^2 ∂_t S^2 + 2S^2(-2R_νν + H|∇f| - |∇f|^2) - 8 S L22/|∇f|^3,
    the derivative part of B before dividing by H^(2+σ).

    R_νν enters twice: once from ν(S|∇f|) and once from |∇f| ∂_t|∇f| = -R_νν.
    Only with both does the sum with 4 R_1212 S^2 reproduce 2 C0 S^2, since
    2R = 4 R_1212 + 4 R_νν. The one-R_νν form is kept in the details.
    """
    sheet = TermSheet(probe, step)
    frame = _checked_frame(probe.frame, "B rewrite")
    H = frame.H
    gn = frame.grad_norm
    S = frame.S
    L22, _ = _L22_readings(frame)
    h = frame.shape_matrix()

    lhs = 2.0 * float(np.sum(h * frame_curvature(frame).gradient_terms()))
    flow_S2 = sheet.flow(PRINCIPAL_GAP_SQ)
    terms = {
        "flow_S2": gn ** 2 * flow_S2,
        "ricci_normal": -4.0 * S ** 2 * frame.R_nunu,
        "mean_curvature": 2.0 * S ** 2 * (H * gn - gn ** 2),
        "L22": -8.0 * S * L22 / gn ** 3,
    }
    rhs = sum(terms.values())
    details = {
        "flow_S2": flow_S2,
        "rhs_single_R_nunu": rhs + 2.0 * S ** 2 * frame.R_nunu,
    }
    return Sides(lhs, rhs, terms, details)


def verify_lemma_B_reduction(
    model: SolitonModel,
    p: ChartPoint,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
    tolerance: float = EVOLUTION_TOLERANCE,
) -> ResidualReport:
    probe = probe_for(model, p, probe)
    _checked_frame(probe.frame, "B rewrite")
    return fd_report(
        "lemma_B_reduction", model, p.coords,
        lambda h: lemma_B_reduction_sides(probe, h),
        step or probe.default_step, tolerance,
    )


def lemma_B_sides(probe: LevelSetProbe, step: float, sigma: float) -> Sides:
    """
    -B/H^(2+σ) = |∇f|^2 ∂_t U - (2C0 - (2+σ)⟨∇H, ∇f⟩/H - 2H|∇f|) U
                 - 8 L22 sqrt(U) / (H^((2+σ)/2) |∇f|^3).
    """
    sheet = TermSheet(probe, step)
    frame = _checked_frame(probe.frame, "B rewrite")
    c0 = _hamilton_constant(probe.model)
    H = frame.H
    gn = frame.grad_norm
    S = frame.S
    U = frame.umbilical_ratio(sigma)
    power = 2.0 + sigma
    U_field = GeometricField.u_sigma(sigma)

    curvature = frame_curvature(frame)
    h = frame.shape_matrix()
    B = curvature.b_term(h)
    flow_U = sheet.flow(U_field)
    H_dot_f = sheet.dot_grad_f(MEAN_CURVATURE)
    L22, L22_full = _L22_readings(frame)

    terms = {
        "flow_U": gn ** 2 * flow_U,
        "reaction": -(2.0 * c0 - power * H_dot_f / H - 2.0 * H * gn) * U,
        "L22": -8.0 * L22 * math.sqrt(U) / (H ** (power / 2.0) * gn ** 3),
    }

    # Intermediate steps of the rewrite, reported only.
    reduction = lemma_B_reduction_sides(probe, step)
    flow_S2 = reduction.details["flow_S2"]
    quotient_lhs = gn ** 2 * flow_S2 / H ** power
    quotient_rhs = gn ** 2 * flow_U + power / H * H_dot_f * U
    d2_nu2 = curvature.ricci_derivative(1, 2, 1)
    d1_nu1 = curvature.ricci_derivative(0, 2, 0)
    d1_nu2 = curvature.ricci_derivative(0, 2, 1)
    sectional = 4.0 * curvature.sectional_tangent * S ** 2
    details = {
        "B": B,
        "L22": L22,
        "L22_full": L22_full,
        "curvature_derivative_reduction": reduction.lhs - reduction.rhs,
        "quotient_rule_reduction": quotient_lhs - quotient_rhs,
        "B_principal": sectional - 2.0 * S * (d2_nu2 - d1_nu1),
        "B_literal_nu2": sectional - 2.0 * S * (d2_nu2 - d1_nu2),
    }
    return Sides(-B / H ** power, sum(terms.values()), terms, details)


def verify_lemma_B(
    model: SolitonModel,
    p: ChartPoint,
    sigma: float,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
    tolerance: float = EVOLUTION_TOLERANCE,
) -> ResidualReport:
    probe = probe_for(model, p, probe)
    _checked_frame(probe.frame, "B rewrite")
    return fd_report(
        "lemma_B", model, p.coords,
        lambda h: lemma_B_sides(probe, h, sigma),
        step or probe.default_step, tolerance, sigma,
    )


# ============================================================================
# The weight term D
# ============================================================================

def lemma_d_sides(
    kappa1: float,
    kappa2: float,
    lam_hess: np.ndarray,
    H_grad: np.ndarray,
    lam_grad: np.ndarray,
    sigma: float,
    cutoff: float = DEFAULT_CONFIG.mean_curvature_cutoff,
) -> Tuple[float, float]:
    """
    Both sides of the D rewrite from principal-frame data.

    Left: h^ij(Hλ_ij + 2H_iλ_j) - H(HΔλ + 2⟨∇H, ∇λ⟩)/2 with h = diag(κ1, κ2).
    Right: H^((2+σ)/2)/2 (H(λ_22 - λ_11) + 2(H_2λ_2 - H_1λ_1)) sqrt(U_σ).
    """
    H = kappa1 + kappa2
    if H <= cutoff:
        raise MeanCurvatureDegenerateError(H, cutoff)
    lam_hess = np.asarray(lam_hess, dtype=float)
    H_grad = np.asarray(H_grad, dtype=float)
    lam_grad = np.asarray(lam_grad, dtype=float)
    h = np.diag([kappa1, kappa2])
    power = 2.0 + sigma

    lhs = (H * float(np.sum(h * lam_hess))
           + float(np.sum(h * (np.outer(H_grad, lam_grad) + np.outer(lam_grad, H_grad))))
           - 0.5 * H * (H * float(np.trace(lam_hess)) + 2.0 * float(H_grad @ lam_grad)))
    U = (kappa2 - kappa1) ** 2 / H ** power
    rhs = (0.5 * H ** (power / 2.0)
           * (H * (lam_hess[1, 1] - lam_hess[0, 0]) + 2.0 * (H_grad[1] * lam_grad[1] - H_grad[0] * lam_grad[0]))
           * math.sqrt(U))
    return float(lhs), float(rhs)


def lemma_D_sides(probe: LevelSetProbe, step: float, sigma: float,
                  reading: DerivativeReading = DerivativeReading.INTRINSIC) -> Sides:
    sheet = TermSheet(probe, step, reading)
    frame = _checked_frame(probe.frame, "D rewrite")
    lam_hess = sheet.hess(WEIGHT)
    H_grad = sheet.tangent_grad(MEAN_CURVATURE)
    lam_grad = sheet.tangent_grad(WEIGHT)
    lhs = weight_term_D(sheet)
    _, rhs = lemma_d_sides(frame.kappa1, frame.kappa2, lam_hess, H_grad, lam_grad, sigma,
                           frame.mean_curvature_cutoff)
    terms = {
        "hessian_part": frame.H * frame.S * float(np.max(np.abs(lam_hess))),
        "gradient_part": frame.S * float(np.max(np.abs(np.outer(H_grad, lam_grad)))),
    }
    return Sides(lhs, rhs, terms)


def verify_lemma_D(
    model: SolitonModel,
    p: ChartPoint,
    sigma: float,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
    reading: DerivativeReading = DerivativeReading.INTRINSIC,
    tolerance: float = EVOLUTION_TOLERANCE,
) -> ResidualReport:
    probe = probe_for(model, p, probe)
    _checked_frame(probe.frame, "D rewrite")
    return fd_report(
        "lemma_D", model, p.coords,
        lambda h: lemma_D_sides(probe, h, sigma, reading),
        step or probe.default_step, tolerance, sigma,
    )


# ============================================================================
# Combined equation and its Θ-form
# ============================================================================

def prop3_sides(probe: LevelSetProbe, step: float, sigma: float,
                reading: DerivativeReading = DerivativeReading.INTRINSIC,
                lhs_step: Optional[float] = None) -> Sides:
    """
    ∂_t U = X + λ|∇f|^2 ∂_t U, with X every other term.

    The left side is the central difference along the integrated flow line
    (lhs_step, default step); the right side reads ∂_t U from the ambient
    stencil. The Θ-form ∂_τ U = X/(λ|∇f|^2 - 1) is checked on the ambient
    value, and trajectory_gap is the difference of the two readings.
    """
    sheet = TermSheet(probe, step, reading)
    frame = _checked_frame(probe.frame, "combined umbilical ratio equation")
    c0 = _hamilton_constant(probe.model)
    lam = frame.require_lambda()
    theta = frame.require_theta()
    U_field = GeometricField.u_sigma(sigma)
    H = frame.H
    gn = frame.grad_norm
    U = frame.umbilical_ratio(sigma)
    root_U = math.sqrt(U)
    power = 2.0 + sigma
    h = frame.shape_matrix()

    H_grad = sheet.tangent_grad(MEAN_CURVATURE)
    lam_grad = sheet.tangent_grad(WEIGHT)
    lam_hess = sheet.hess(WEIGHT)
    G2 = gradient_square(H, H_grad, h, sheet.shape_gradient())
    H_dot_f = sheet.dot_grad_f(MEAN_CURVATURE)
    L22, L22_full = _L22_readings(frame)

    X_terms = {
        "lambda_laplacian_U": lam * sheet.lap(U_field),
        "gradient_coupling_U": lam * 2.0 * (1.0 + sigma) / H * sheet.inner(MEAN_CURVATURE, U_field),
        "gradient_square": -2.0 * lam * G2 / H ** (4.0 + sigma),
        "gradient_H_sq": lam * sigma * (1.0 + sigma) * sheet.inner(MEAN_CURVATURE, MEAN_CURVATURE) / H ** 2 * U,
        "reaction": -lam * sigma * (frame.A2 + frame.R_nunu) * U,
        "hamilton_reaction": -lam * (2.0 * c0 - power * H_dot_f / H - 2.0 * H * gn) * U,
        "L22": -8.0 * lam * L22 * root_U / (H ** (power / 2.0) * gn ** 3),
        "weight_laplacian": -power * (sheet.lap(WEIGHT) + 2.0 / H * sheet.inner(MEAN_CURVATURE, WEIGHT)) * U,
        "weight_hessian": (H * (lam_hess[1, 1] - lam_hess[0, 0])
                           + 2.0 * (H_grad[1] * lam_grad[1] - H_grad[0] * lam_grad[0]))
                          * root_U / H ** (power / 2.0),
    }
    X = sum(X_terms.values())
    flow_U = sheet.flow(U_field)
    q = lam * gn ** 2
    terms = dict(X_terms, flow_U_weighted=q * flow_U)

    lhs = probe.trajectory_flow_derivative(U_field, (lhs_step or step) * gn)
    prop3_residual = flow_U - X - q * flow_U
    theta_residual = -flow_U - X / (q - 1.0)
    details = {
        "theta": theta,
        "theta_residual": theta_residual,
        "prop3_residual": prop3_residual,
        "form_consistency": abs(prop3_residual - (q - 1.0) * theta_residual),
        "trajectory_gap": lhs - flow_U,
        "L22_full": L22_full,
    }
    return Sides(lhs, X + q * flow_U, terms, details)


def verify_prop3(
    model: SolitonModel,
    p: ChartPoint,
    sigma: float,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
    reading: DerivativeReading = DerivativeReading.INTRINSIC,
    tolerance: float = EVOLUTION_TOLERANCE,
) -> ResidualReport:
    probe = probe_for(model, p, probe)
    _checked_frame(probe.frame, "combined umbilical ratio equation")
    probe.frame.require_theta()
    return fd_report(
        "prop3", model, p.coords,
        lambda h: prop3_sides(probe, h, sigma, reading),
        step or probe.default_step, tolerance, sigma,
    )


# ============================================================================
# U_0 from the Ricci difference
# ============================================================================

def verify_main_theorem_U0(model: SolitonModel, p: ChartPoint, frame: Optional[LevelSetFrame] = None,
                           tolerance: Optional[float] = None) -> ResidualReport:
    """S^2/H^2 against (R22 - R11)^2/(|∇f|^2 H^2); the form with an extra 1/4 is reported."""
    frame = frame if frame is not None else frame_at(model, p)
    frame.require_mean_curvature()
    H2 = frame.H ** 2
    ricci_form = (frame.R22 - frame.R11) ** 2 / (frame.grad_norm_sq * H2)
    sides = Sides(frame.S2 / H2, ricci_form, details={"literal_factor_four": 0.25 * ricci_form})
    return build_report("main_theorem_U0", model, p.coords, sides, tolerance or jet_tolerance(model))


# ============================================================================
# Intrinsic vs ambient reading of ∇ and Δ
# ============================================================================

def compare_gradient_readings(
    model: SolitonModel,
    p: ChartPoint,
    sigma: float,
    step: Optional[float] = None,
    probe: Optional[LevelSetProbe] = None,
    tolerance: float = EVOLUTION_TOLERANCE,
) -> Dict[str, Dict[str, float]]:
    """
    Relative residual of the H, |A|^2, U_σ and combined identities under
    both readings, on Richardson-extrapolated sides; entries with
    rel <= tolerance close.
    """
    probe = probe_for(model, p, probe)
    step = step or probe.default_step
    evaluators = {
        "H_evolution": lambda r, h: H_evolution_sides(probe, h, r),
        "A2_evolution": lambda r, h: A2_evolution_sides(probe, h, r),
        "U_evolution": lambda r, h: U_evolution_sides(probe, h, sigma, r),
        "prop3": lambda r, h: prop3_sides(probe, h, sigma, r),
    }
    scale = hamilton_scale(model)
    out: Dict[str, Dict[str, float]] = {}
    for identity, evaluate in evaluators.items():
        row = {}
        for reading in DerivativeReading:
            _, _, sides = extrapolated_sides(lambda h: evaluate(reading, h), step)
            row[reading.value] = residual_measure(sides.lhs, sides.rhs, scale)[1]
        out[identity] = row
        closes = [name for name, rel in row.items() if rel <= tolerance]
        logger.info(f"{identity} on {model.name}: intrinsic {row['intrinsic']:.2e}, "
                    f"ambient {row['ambient']:.2e}, closes under {closes or 'neither'}")
    return out
