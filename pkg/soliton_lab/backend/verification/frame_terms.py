"""
Frame Terms
===========

Ambient curvature in the adapted frame (e1, e2, ν) and the derivative
sheet used by the evolution identities.

Index 2 is ν; tangential indices are 0, 1. Riemann components follow
R_abcd = ⟨R(e_a, e_b) e_d, e_c⟩, so R_abab is a sectional curvature and
Ric_bd = Σ_a R_abad.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ..level_set_geometry import (
    MEAN_CURVATURE,
    WEIGHT,
    GeometricField,
    LevelSetFrame,
)
from ..surface_calculus import DerivativeReading, LevelSetProbe

NU = 2
TANGENT = slice(0, 2)


@dataclass(frozen=True)
class FrameCurvature:
    """Rm and ∇Rm components in the adapted frame."""

    rm: np.ndarray  # (3, 3, 3, 3)
    drm: Optional[np.ndarray]  # (3, 3, 3, 3, 3), derivative index first

    @classmethod
    def from_frame(cls, frame: LevelSetFrame) -> "FrameCurvature":
        E = frame.basis()
        geometry = frame.geometry
        rm = np.einsum("ijkl,ia,jb,kc,ld->abcd", geometry.riemann_lowered.value, E, E, E, E,
                       optimize=True)
        drm = None
        if geometry.metric.order >= 3:
            drm = np.einsum("mijkl,me,ia,jb,kc,ld->eabcd",
                            geometry.riemann_derivative.value, E, E, E, E, E, optimize=True)
        return cls(rm, drm)

    def _require_drm(self) -> np.ndarray:
        if self.drm is None:
            raise ValueError("Frame curvature was built without ∇Rm (needs order-3 jets)")
        return self.drm

    @property
    def tangential_ricci(self) -> np.ndarray:
        """X_li = Σ_m R_lmim over tangential m."""
        return np.einsum("lmim->li", self.rm[TANGENT, TANGENT, TANGENT, TANGENT])

    @property
    def sectional_tangent(self) -> float:
        """R_1212, the sectional curvature of the tangent plane."""
        return float(self.rm[0, 1, 0, 1])

    def gradient_terms(self) -> np.ndarray:
        """G_ij = Σ_l (∇_j R_νlil + ∇_l R_νijl)."""
        drm = self._require_drm()
        first = np.einsum("jlil->ij", drm[TANGENT, NU, TANGENT, TANGENT, TANGENT])
        second = np.einsum("lijl->ij", drm[TANGENT, NU, TANGENT, TANGENT, TANGENT])
        return first + second

    def ricci_derivative(self, m: int, b: int, c: int) -> float:
        """(∇_m Ric)(e_b, e_c)."""
        drm = self._require_drm()
        return float(np.einsum("aa->", drm[m, :, b, :, c]))

    def shape_curvature_terms(self, h: np.ndarray) -> np.ndarray:
        """-(Xh + hX)_ij + 2 Σ h_lm R_limj + G_ij, the ambient part of ∂_t h."""
        X = self.tangential_ricci
        rm_t = self.rm[TANGENT, TANGENT, TANGENT, TANGENT]
        return -(X @ h + h @ X) + 2.0 * np.einsum("lm,limj->ij", h, rm_t) + self.gradient_terms()

    def b_term(self, h: np.ndarray) -> float:
        """B = 4 h h X - 4 h h Rm - 2 h G (all tangential contractions)."""
        X = self.tangential_ricci
        rm_t = self.rm[TANGENT, TANGENT, TANGENT, TANGENT]
        return float(
            4.0 * np.trace(h @ h @ X)
            - 4.0 * np.einsum("ij,lm,limj->", h, h, rm_t)
            - 2.0 * np.sum(h * self.gradient_terms())
        )


@lru_cache(maxsize=256)
def frame_curvature(frame: LevelSetFrame) -> FrameCurvature:
    """Cached FrameCurvature per frame object."""
    return FrameCurvature.from_frame(frame)


class TermSheet:
    """
    Derivatives of level-set fields at one point and step under one
    reading of ∇ and Δ.

    Flow derivatives and ⟨∇Q, ∇f⟩ always use the ambient stencil.
    Derivatives of h always use the Σ-geodesic stencil.
    """

    def __init__(self, probe: LevelSetProbe, step: float,
                 reading: DerivativeReading = DerivativeReading.INTRINSIC):
        self.probe = probe
        self.frame = probe.frame
        self.step = step
        self.reading = reading
        self.ambient = probe.ambient(step)
        self.surface = probe.surface(step)

    @property
    def intrinsic(self) -> bool:
        return self.reading == DerivativeReading.INTRINSIC

    def grad(self, field: GeometricField) -> np.ndarray:
        """Gradient in the orthonormal frame: 2 components (intrinsic) or 3 (ambient)."""
        if self.intrinsic:
            return self.surface.gradient(field)
        return self.ambient.frame_gradient(field)

    def tangent_grad(self, field: GeometricField) -> np.ndarray:
        return self.grad(field)[:2]

    def hess(self, field: GeometricField) -> np.ndarray:
        """2x2 second derivatives in (e1, e2)."""
        if self.intrinsic:
            return self.surface.hessian(field)
        return self.ambient.frame_hessian(field)[:2, :2]

    def lap(self, field: GeometricField) -> float:
        if self.intrinsic:
            return self.surface.laplacian(field)
        return self.ambient.laplacian(field)

    def inner(self, a: GeometricField, b: GeometricField) -> float:
        return float(self.grad(a) @ self.grad(b))

    def flow(self, field: GeometricField) -> float:
        return self.ambient.flow_derivative(field)

    def dot_grad_f(self, field: GeometricField) -> float:
        """⟨∇Q, ∇f⟩ with the ambient gradient."""
        return self.frame.grad_norm_sq * self.ambient.flow_derivative(field)

    def shape_gradient(self) -> np.ndarray:
        return self.surface.shape_gradient()

    def shape_laplacian(self) -> np.ndarray:
        return self.surface.shape_laplacian()

    def weight_coupling(self, lam_field: GeometricField = WEIGHT) -> float:
        """h^ij (H λ_ij + 2 H_i λ_j) with symmetric h."""
        h = self.frame.shape_matrix()
        lam_hess = self.hess(lam_field)
        H_grad = self.tangent_grad(MEAN_CURVATURE)
        lam_grad = self.tangent_grad(lam_field)
        return float(
            self.frame.H * np.sum(h * lam_hess)
            + np.sum(h * (np.outer(H_grad, lam_grad) + np.outer(lam_grad, H_grad)))
        )
