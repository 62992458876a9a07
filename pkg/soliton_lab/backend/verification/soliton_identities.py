"""
Soliton Identities
==================

Pointwise identities that need only jets and the level-set frame:

1. Soliton equation Ric + Hess f = μ g
2. Trace, traced second Bianchi, Bochner, Hamilton's identity and R >= 0
3. Flow equation H|∇f| = R - R_νν and S|∇f| = R22 - R11
"""

import logging
import math
from typing import Optional

import numpy as np

from ..chart_geometry import ChartPoint, orthonormal_frame
from ..lab_exceptions import PreconditionError, UnsupportedModelError
from ..level_set_geometry import LevelSetFrame, frame_at
from ..soliton_models import SolitonModel
from .residuals import FAIL, PASS, ResidualReport, Sides, build_report

logger = logging.getLogger(__name__)

LEMMA1_PARTS = ("a", "b", "c", "d", "e")
NONNEGATIVE_FLOOR = -1e-12


def jet_tolerance(model: SolitonModel) -> float:
    return 1e-8 if model.exact else 1e-6


def verify_soliton_equation(model: SolitonModel, p: ChartPoint,
                            tolerance: Optional[float] = None) -> ResidualReport:
    """Ric against μ g - Hess f, component-wise in an orthonormal frame."""
    geometry = model.geometry(p, 2, potential_order=2)
    E = orthonormal_frame(geometry.metric.g)
    ric = E.T @ geometry.ricci.value @ E
    hess = E.T @ geometry.hessian_f.value @ E
    sides = Sides(
        lhs=ric,
        rhs=model.soliton_constant * np.eye(model.dimension) - hess,
        terms={"ricci": float(np.max(np.abs(ric))), "hessian": float(np.max(np.abs(hess)))},
    )
    return build_report("soliton", model, p.coords, sides, tolerance or jet_tolerance(model))


def _lemma1_sides(model: SolitonModel, p: ChartPoint, part: str) -> Sides:
    mu = model.soliton_constant
    n = model.dimension

    if part == "a":
        geometry = model.geometry(p, 2, potential_order=2)
        R = float(geometry.scalar.value)
        lap_f = float(np.einsum("ij,ij->", geometry.inverse.value, geometry.hessian_f.value))
        return Sides(R, n * mu - lap_f, {"R": R, "laplacian_f": lap_f})

    if part == "b":
        geometry = model.geometry(p, 3, potential_order=1)
        E = orthonormal_frame(geometry.metric.g)
        dR = E.T @ geometry.scalar_gradient.value
        ric_grad = 2.0 * E.T @ (geometry.ricci.value @ geometry.grad_f.value)
        return Sides(dR, ric_grad, {"dR": float(np.max(np.abs(dR)))})

    if part == "c":
        geometry = model.geometry(p, 4, potential_order=1)
        inverse = geometry.inverse.value
        ric = geometry.ricci.value
        R = float(geometry.scalar.value)
        lap_R = float(geometry.scalar_laplacian.value)
        ric_sq = float(np.einsum("ij,kl,ik,jl->", ric, ric, inverse, inverse))
        drift = float(geometry.scalar_gradient.value @ geometry.grad_f.value)
        return Sides(
            lap_R + 2.0 * ric_sq,
            drift + 2.0 * mu * R,
            {"laplacian_R": lap_R, "ricci_sq": 2.0 * ric_sq, "drift": drift},
        )

    if part == "d":
        c0 = model.hamilton_constant
        if not math.isfinite(c0):
            raise UnsupportedModelError(model.name, "Hamilton identity (no constant)")
        geometry = model.geometry(p, 2, potential_order=1)
        R = float(geometry.scalar.value)
        grad_sq = float(geometry.grad_f_norm_sq.value)
        f = float(geometry.f.value)
        return Sides(R + grad_sq - 2.0 * mu * f, c0, {"R": R, "grad_norm_sq": grad_sq})

    if part == "e":
        geometry = model.geometry(p, 2, potential_order=0)
        R = float(geometry.scalar.value)
        return Sides(R, max(R, 0.0), {"R": abs(R)})

    raise PreconditionError(f"Unknown lemma1 part '{part}', expected one of {LEMMA1_PARTS}")


def verify_lemma1(model: SolitonModel, p: ChartPoint, part: str,
                  tolerance: Optional[float] = None) -> ResidualReport:
    """
    Parts: (a) R + Δf = nμ; (b) ∇R = 2 Ric(∇f); (c) ΔR + 2|Ric|^2 = ⟨∇R, ∇f⟩ + 2μR;
    (d) R + |∇f|^2 - 2μf = C0; (e) R >= 0.
    """
    sides = _lemma1_sides(model, p, part)
    report = build_report(f"lemma1_{part}", model, p.coords, sides, tolerance or jet_tolerance(model))
    if part == "e":
        report.abs_residual = max(0.0, -float(sides.lhs))
        report.rel_residual = report.abs_residual / max(abs(float(sides.lhs)), 1.0)
        report.status = PASS if float(sides.lhs) >= NONNEGATIVE_FLOOR else FAIL
    return report


def _frame(model: SolitonModel, p: ChartPoint, frame: Optional[LevelSetFrame]) -> LevelSetFrame:
    return frame if frame is not None else frame_at(model, p)


def verify_flow_equation(model: SolitonModel, p: ChartPoint, frame: Optional[LevelSetFrame] = None,
                         tolerance: Optional[float] = None) -> ResidualReport:
    """H|∇f| = R - R_νν."""
    frame = _frame(model, p, frame)
    sides = Sides(frame.H * frame.grad_norm, frame.R - frame.R_nunu,
                  {"R": frame.R, "R_nunu": frame.R_nunu})
    return build_report("flow_equation", model, p.coords, sides, tolerance or jet_tolerance(model))


def verify_principal_difference(model: SolitonModel, p: ChartPoint, frame: Optional[LevelSetFrame] = None,
                                tolerance: Optional[float] = None) -> ResidualReport:
    """S|∇f| = R22 - R11."""
    frame = _frame(model, p, frame)
    sides = Sides(frame.S * frame.grad_norm, frame.R22 - frame.R11,
                  {"R11": frame.R11, "R22": frame.R22})
    return build_report("principal_difference", model, p.coords, sides, tolerance or jet_tolerance(model))
