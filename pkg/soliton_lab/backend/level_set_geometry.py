"""
Level Set Geometry Module
=========================

Extrinsic geometry of the level sets Σ_t = {f = t} of the potential:
adapted frame (ν, e1, e2), second fundamental form, H, |A|^2, S^2, the
weight λ = 1/(R - R_νν), Θ = λ/(λ|∇f|^2 - 1), the umbilical ratio U_σ and
the tensor L = 2 dR⊗dR - |∇R|^2 g.

Sign convention: h(X, Y) = -Hess f(X, Y)/|∇f| on tangent vectors, which
equals Ric(X, Y)/|∇f| on a steady soliton, so that H|∇f| = R - R_νν.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from .chart_geometry import ChartPoint, CurvatureJets, TensorValue
from .lab_exceptions import (
    EigenvectorDegenerateError,
    GradientCriticalError,
    LabError,
    MeanCurvatureDegenerateError,
    ThetaSingularError,
    UnsupportedModelError,
)
from .soliton_models import SolitonModel

logger = logging.getLogger(__name__)


@dataclass
class LevelSetConfig:
    """Numerical cut-offs for level-set computations."""

    gradient_cutoff: float = 1e-8
    mean_curvature_cutoff: float = 1e-10
    umbilic_gap: float = 1e-10  # relative to max(1, |H|)
    lambda_cutoff: float = 1e-12  # |R - R_nunu| below this leaves lambda undefined
    theta_cutoff: float = 1e-10
    step_factor: float = 1e-3  # default step = factor * curvature length, clamped to [1, 10]
    reprojection_tolerance: float = 1e-12
    geodesic_rtol: float = 1e-12
    geodesic_atol: float = 1e-14

    def __post_init__(self):
        for name in ("gradient_cutoff", "mean_curvature_cutoff", "umbilic_gap", "step_factor",
                     "reprojection_tolerance", "geodesic_rtol", "geodesic_atol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_CONFIG = LevelSetConfig()


@dataclass(frozen=True, eq=False)
class LevelSetFrame:
    """Adapted frame and extrinsic quantities of Σ_t at one point."""

    point: ChartPoint
    level: float
    grad_norm: float
    nu: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    kappa1: float
    kappa2: float
    H: float
    A2: float
    S2: float
    lam: Optional[float]
    theta: Optional[float]
    R: float
    R_nunu: float
    R11: float
    R22: float
    umbilical: bool
    principal_gap: float
    mean_curvature_degenerate: bool
    metric: np.ndarray = field(repr=False)
    shape_form: np.ndarray = field(repr=False)  # chart components, tangent-projected
    df: np.ndarray = field(repr=False)
    grad_R: Optional[np.ndarray] = field(default=None, repr=False)  # dR, covariant
    geometry: Optional[CurvatureJets] = field(default=None, repr=False)
    mean_curvature_cutoff: float = field(default=DEFAULT_CONFIG.mean_curvature_cutoff, repr=False)

    @property
    def S(self) -> float:
        """Principal difference κ2 - κ1 (>= 0)."""
        return self.kappa2 - self.kappa1

    @property
    def grad_norm_sq(self) -> float:
        return self.grad_norm ** 2

    @property
    def flow_vector(self) -> np.ndarray:
        """∇f/|∇f|^2 in chart components."""
        return self.nu / self.grad_norm

    def basis(self) -> np.ndarray:
        """Columns e1, e2, ν."""
        return np.column_stack([self.e1, self.e2, self.nu])

    def shape_matrix(self) -> np.ndarray:
        """h(e_i, e_j) for i, j in {1, 2}."""
        tangent = self.basis()[:, :2]
        return tangent.T @ self.shape_form @ tangent

    def shape_on(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(a @ self.shape_form @ b)

    def require_principal(self, what: str = "principal directions") -> None:
        if self.umbilical:
            raise EigenvectorDegenerateError(self.principal_gap, what)

    def require_mean_curvature(self) -> None:
        if self.mean_curvature_degenerate:
            raise MeanCurvatureDegenerateError(self.H, self.mean_curvature_cutoff)

    def require_lambda(self) -> float:
        if self.lam is None:
            raise ThetaSingularError(None)
        return self.lam

    def require_theta(self) -> float:
        if self.theta is None:
            lam = self.require_lambda()
            raise ThetaSingularError(lam * self.grad_norm_sq - 1.0)
        return self.theta

    def umbilical_ratio(self, sigma: float) -> float:
        self.require_mean_curvature()
        return self.S2 / self.H ** (2.0 + sigma)

    def curvature_gradient_frame(self) -> np.ndarray:
        """(e1 R, e2 R, ν R)."""
        if self.grad_R is None:
            raise ValueError("Frame was built without curvature gradients")
        return self.basis().T @ self.grad_R


def _g_norm(g: np.ndarray, v: np.ndarray) -> float:
    return float(np.sqrt(v @ g @ v))


def _tangent_basis(g: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """
    Orthonormal tangent pair from the chart axes, first axis preferred.

    The first vector is the normalized tangential part of the first chart
    axis that is not (nearly) normal; the second comes from Gram-Schmidt
    of the remaining axes against ν and the first.
    """
    n = g.shape[0]
    chosen = []
    for axis in range(n):
        v = np.zeros(n)
        v[axis] = 1.0
        scale = _g_norm(g, v)
        for u in [nu] + chosen:
            v = v - (u @ g @ v) * u
        norm = _g_norm(g, v)
        if norm > 1e-8 * scale:
            chosen.append(v / norm)
        if len(chosen) == 2:
            break
    return np.column_stack(chosen)


def _fix_sign(c: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(c)))
    return -c if c[idx] < 0 else c


def frame_at(
    model: SolitonModel,
    p: ChartPoint,
    config: Optional[LevelSetConfig] = None,
    with_gradients: bool = False,
) -> LevelSetFrame:
    """
    Adapted frame of the level set through p.

    Args:
        model: 3-dimensional model
        p: chart point
        config: cut-offs (defaults if None)
        with_gradients: also compute dR (needs order-3 metric jets)

    Raises:
        UnsupportedModelError: model is not 3-dimensional
        GradientCriticalError: |∇f| <= gradient cutoff
    """
    config = config or DEFAULT_CONFIG
    if model.dimension != 3:
        raise UnsupportedModelError(model.name, "level-set frame (needs dimension 3)")

    geometry = model.geometry(p, 3 if with_gradients else 2, potential_order=2)
    g = geometry.metric.g
    df = geometry.df.value
    grad = geometry.grad_f.value
    grad_norm = float(np.sqrt(max(float(df @ grad), 0.0)))
    if grad_norm <= config.gradient_cutoff:
        raise GradientCriticalError(grad_norm, config.gradient_cutoff)

    nu = grad / grad_norm
    projector = np.eye(3) - np.outer(nu, g @ nu)
    hess = geometry.hessian_f.value
    shape_form = -(projector.T @ hess @ projector) / grad_norm
    shape_form = 0.5 * (shape_form + shape_form.T)

    tangent = _tangent_basis(g, nu)
    h2 = tangent.T @ shape_form @ tangent
    h2 = 0.5 * (h2 + h2.T)
    kappas, vecs = np.linalg.eigh(h2)
    kappa1, kappa2 = float(kappas[0]), float(kappas[1])
    H = kappa1 + kappa2
    gap = kappa2 - kappa1
    umbilical = gap < config.umbilic_gap * max(1.0, abs(H))
    if umbilical:
        e1, e2 = tangent[:, 0], tangent[:, 1]
    else:
        e1 = tangent @ _fix_sign(vecs[:, 0])
        e2 = tangent @ _fix_sign(vecs[:, 1])

    ric = geometry.ricci.value
    R = float(geometry.scalar.value)
    R_nunu = float(nu @ ric @ nu)
    R11 = float(e1 @ ric @ e1)
    R22 = float(e2 @ ric @ e2)

    denom = R - R_nunu
    lam = 1.0 / denom if abs(denom) > config.lambda_cutoff * max(1.0, abs(R)) else None
    theta = None
    if lam is not None:
        theta_denom = lam * grad_norm ** 2 - 1.0
        if abs(theta_denom) > config.theta_cutoff * max(1.0, abs(lam) * grad_norm ** 2):
            theta = lam / theta_denom

    grad_R = geometry.scalar_gradient.value if with_gradients else None

    return LevelSetFrame(
        point=p,
        level=float(geometry.f.value),
        grad_norm=grad_norm,
        nu=nu,
        e1=e1,
        e2=e2,
        kappa1=kappa1,
        kappa2=kappa2,
        H=H,
        A2=kappa1 ** 2 + kappa2 ** 2,
        S2=gap ** 2,
        lam=lam,
        theta=theta,
        R=R,
        R_nunu=R_nunu,
        R11=R11,
        R22=R22,
        umbilical=bool(umbilical),
        principal_gap=gap,
        mean_curvature_degenerate=H <= config.mean_curvature_cutoff,
        metric=g,
        shape_form=shape_form,
        df=df,
        grad_R=grad_R,
        geometry=geometry,
        mean_curvature_cutoff=config.mean_curvature_cutoff,
    )


def umbilical_ratio(model: SolitonModel, p: ChartPoint, sigma: float,
                    config: Optional[LevelSetConfig] = None) -> float:
    """U_σ = S^2 / H^(2+σ)."""
    config = config or DEFAULT_CONFIG
    frame = frame_at(model, p, config)
    if frame.H <= config.mean_curvature_cutoff:
        raise MeanCurvatureDegenerateError(frame.H, config.mean_curvature_cutoff)
    return frame.S2 / frame.H ** (2.0 + sigma)


# ============================================================================
# The tensor L
# ============================================================================

@dataclass
class LTensor:
    """L = 2 dR⊗dR - |∇R|^2 g at a point, with its (e2, e2) readings."""

    tensor: TensorValue
    grad_R_norm_sq: float
    inverse_metric: np.ndarray
    frame: Optional[LevelSetFrame] = None
    frame_error: Optional[LabError] = None

    def trace(self) -> float:
        return float(np.einsum("ij,ij->", self.inverse_metric, self.tensor.components))

    def _principal_frame(self) -> LevelSetFrame:
        if self.frame is None:
            raise self.frame_error
        self.frame.require_principal("L22")
        return self.frame

    @property
    def l22(self) -> float:
        """L(e2, e2) = 2 (e2 R)^2 - |∇R|^2."""
        frame = self._principal_frame()
        return float(frame.e2 @ self.tensor.components @ frame.e2)

    @property
    def l22_reduced(self) -> float:
        """(e2 R)^2 - (e1 R)^2, the form that drops the normal part of ∇R."""
        frame = self._principal_frame()
        e1R, e2R, _ = frame.curvature_gradient_frame()
        return float(e2R ** 2 - e1R ** 2)

    @property
    def l22_discrepancy(self) -> float:
        return self.l22 - self.l22_reduced


def L_tensor(model: SolitonModel, p: ChartPoint, config: Optional[LevelSetConfig] = None) -> LTensor:
    """
    L = 2 dR⊗dR - |∇R|^2 g. The full tensor needs no frame; the (e2, e2)
    readings raise when the frame is unavailable or umbilical.
    """
    geometry = model.geometry(p, 3, potential_order=1)
    dR = geometry.scalar_gradient.value
    g = geometry.metric.g
    inverse = geometry.inverse.value
    norm_sq = float(dR @ inverse @ dR)
    tensor = TensorValue(2, 0, 2.0 * np.outer(dR, dR) - norm_sq * g, p)

    frame, error = None, None
    try:
        frame = frame_at(model, p, config, with_gradients=True)
    except (UnsupportedModelError, GradientCriticalError) as e:
        error = e
    return LTensor(tensor, norm_sq, inverse, frame, error)


# ============================================================================
# Scalar fields on level sets
# ============================================================================

class FieldKind(str, Enum):
    H = "H"
    A2 = "A2"
    S2 = "S2"
    U_SIGMA = "U_sigma"
    LAMBDA = "lambda"
    R = "R"
    GRAD_NORM_SQ = "grad_norm_sq"
    L22 = "L22"
    CUSTOM = "custom"


@dataclass(frozen=True)
class GeometricField:
    """A scalar field evaluated from the level-set frame at a point."""

    kind: FieldKind
    sigma: Optional[float] = None
    function: Optional[Callable[[LevelSetFrame], float]] = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind == FieldKind.U_SIGMA and self.sigma is None:
            raise ValueError("U_sigma field needs sigma")
        if self.kind == FieldKind.CUSTOM and self.function is None:
            raise ValueError("custom field needs a function")

    @property
    def key(self) -> str:
        if self.kind == FieldKind.U_SIGMA:
            return f"U_sigma[{self.sigma!r}]"
        if self.kind == FieldKind.CUSTOM:
            return f"custom[{self.name or id(self.function)}]"
        return self.kind.value

    @property
    def needs_curvature_gradient(self) -> bool:
        return self.kind == FieldKind.L22

    def evaluate(self, frame: LevelSetFrame) -> float:
        kind = self.kind
        if kind == FieldKind.H:
            return frame.H
        if kind == FieldKind.A2:
            return frame.A2
        if kind == FieldKind.S2:
            return frame.S2
        if kind == FieldKind.U_SIGMA:
            return frame.umbilical_ratio(self.sigma)
        if kind == FieldKind.LAMBDA:
            return frame.require_lambda()
        if kind == FieldKind.R:
            return frame.R
        if kind == FieldKind.GRAD_NORM_SQ:
            return frame.grad_norm_sq
        if kind == FieldKind.L22:
            frame.require_principal("L22")
            e1R, e2R, _ = frame.curvature_gradient_frame()
            return float(e2R ** 2 - e1R ** 2)
        return float(self.function(frame))

    @classmethod
    def u_sigma(cls, sigma: float) -> "GeometricField":
        return cls(FieldKind.U_SIGMA, sigma=float(sigma))

    @classmethod
    def custom(cls, function: Callable[[LevelSetFrame], float], name: str) -> "GeometricField":
        return cls(FieldKind.CUSTOM, function=function, name=name)


MEAN_CURVATURE = GeometricField(FieldKind.H)
NORM_A_SQ = GeometricField(FieldKind.A2)
PRINCIPAL_GAP_SQ = GeometricField(FieldKind.S2)
WEIGHT = GeometricField(FieldKind.LAMBDA)
SCALAR_CURVATURE = GeometricField(FieldKind.R)
GRAD_NORM_SQ = GeometricField(FieldKind.GRAD_NORM_SQ)
L22_FIELD = GeometricField(FieldKind.L22)
POTENTIAL = GeometricField.custom(lambda frame: frame.level, "f")


def parse_field(spec: str) -> GeometricField:
    """Field from an identifier such as "H", "lambda" or "U_sigma(2)"."""
    spec = spec.strip()
    if spec.startswith("U_sigma"):
        inner = spec[len("U_sigma"):].strip("()[] ")
        return GeometricField.u_sigma(float(inner) if inner else 0.0)
    for kind in FieldKind:
        if kind.value == spec and kind not in (FieldKind.U_SIGMA, FieldKind.CUSTOM):
            return GeometricField(kind)
    raise ValueError(f"Unknown field '{spec}'")


def principal_axes(frame: LevelSetFrame) -> Tuple[np.ndarray, np.ndarray]:
    frame.require_principal()
    return frame.e1, frame.e2
