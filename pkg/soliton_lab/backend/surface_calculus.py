"""
Surface Calculus Module
=======================

Finite-difference calculus on the level sets Σ_t of the potential.

Two independent stencils are provided for a field Q evaluated from
level-set frames:

1. AmbientStencil: central differences along the chart axes, giving dQ,
   Hess_M Q, Δ_M Q, the flow derivative ⟨∇Q, ∇f⟩/|∇f|^2 and ∂_ν Q
2. SurfaceStencil: central differences along geodesics of Σ_t launched
   from the point (re-projected onto Σ_t by Newton iteration along ∇f),
   with parallel-transported frames for derivatives of h

Plus the trajectory flow derivative (differencing along integrated lines
of ∇f/|∇f|^2) and subnormal charts {x0 = f, x1, x2}.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from threading import Lock
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import newton

from .chart_geometry import ChartPoint
from .lab_exceptions import ChartExtentError, IntegrationFailureError, ReprojectionError
from .level_set_geometry import (
    DEFAULT_CONFIG,
    GeometricField,
    LevelSetConfig,
    LevelSetFrame,
    frame_at,
)
from .soliton_models import SolitonModel

logger = logging.getLogger(__name__)


class DerivativeReading(str, Enum):
    """How ∇ and Δ in the evolution identities are read."""

    INTRINSIC = "intrinsic"  # Σ-connection, geodesic stencils
    AMBIENT = "ambient"  # M-connection, chart-axis stencils


def default_step(frame: LevelSetFrame, config: Optional[LevelSetConfig] = None) -> float:
    """step_factor times the local curvature length, clamped to [1, 10]."""
    config = config or DEFAULT_CONFIG
    curvature = max(abs(frame.kappa1), abs(frame.kappa2), abs(frame.H))
    return config.step_factor / min(max(curvature, 0.1), 1.0)


# ============================================================================
# Pointwise helpers
# ============================================================================

def _as_point(x: np.ndarray) -> ChartPoint:
    return ChartPoint(tuple(float(v) for v in x))


def flow_vector(model: SolitonModel, x: np.ndarray) -> np.ndarray:
    """∇f/|∇f|^2 at chart position x."""
    geometry = model.geometry(_as_point(x), 0, potential_order=1)
    grad = geometry.grad_f.value
    return grad / float(geometry.df.value @ grad)


def _potential_value(model: SolitonModel, x: np.ndarray, order: int = 0):
    return model.potential_jet(_as_point(x), order)


def _connection_data(model: SolitonModel, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Γ, ν and the tangent-projected shape form at x."""
    geometry = model.geometry(_as_point(x), 1, potential_order=2)
    g = geometry.metric.g
    df = geometry.df.value
    grad = geometry.grad_f.value
    norm = float(np.sqrt(df @ grad))
    nu = grad / norm
    projector = np.eye(len(x)) - np.outer(nu, g @ nu)
    shape = -(projector.T @ geometry.hessian_f.value @ projector) / norm
    return geometry.christoffel.value, nu, shape


def reproject(model: SolitonModel, x: np.ndarray, level: float,
              tolerance: float = DEFAULT_CONFIG.reprojection_tolerance) -> np.ndarray:
    """
    Move x along ∇f/|∇f|^2 onto {f = level}.

    Raises:
        ReprojectionError: Newton iteration fails or |f - level| stays above
            tolerance * max(1, |level|)
    """
    direction = flow_vector(model, x)

    def residual(s: float) -> float:
        return _potential_value(model, x + s * direction).value - level

    def slope(s: float) -> float:
        jet = _potential_value(model, x + s * direction, 1)
        return float(jet.d1 @ direction)

    try:
        s = newton(residual, 0.0, fprime=slope, tol=1e-15, maxiter=50)
    except (RuntimeError, ZeroDivisionError) as e:
        logger.error(f"Re-projection onto f = {level} failed: {e}")
        raise ReprojectionError(float("nan"), tolerance) from e

    y = x + float(s) * direction
    error = abs(_potential_value(model, y).value - level)
    if error >= tolerance * max(1.0, abs(level)):
        raise ReprojectionError(error, tolerance)
    return y


def _tangent_project(model: SolitonModel, x: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    geometry = model.geometry(_as_point(x), 0, potential_order=1)
    g = geometry.metric.g
    grad = geometry.grad_f.value
    nu = grad / np.sqrt(float(geometry.df.value @ grad))
    return vectors - np.outer(vectors @ g @ nu, nu)


def shoot_geodesic(
    model: SolitonModel,
    x: np.ndarray,
    direction: np.ndarray,
    length: float,
    transported: Sequence[np.ndarray] = (),
    config: Optional[LevelSetConfig] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Follow the Σ-geodesic from x with unit initial velocity ``direction``
    for arclength ``length``, parallel-transporting ``transported``.

    In chart components: x'' = -Γ(x', x') + h(x', x') ν and
    E' = -Γ(x', E) + h(x', E) ν. The endpoint is re-projected onto the
    starting level and the transported vectors are projected onto its
    tangent plane.

    Returns:
        (endpoint, transported vectors as rows)
    """
    config = config or DEFAULT_CONFIG
    n = len(x)
    m = len(transported)
    level = _potential_value(model, x).value

    def rhs(s: float, y: np.ndarray) -> np.ndarray:
        pos, vel = y[:n], y[n:2 * n]
        vecs = y[2 * n:].reshape(m, n)
        gamma, nu, shape = _connection_data(model, pos)
        acc = -np.einsum("kij,i,j->k", gamma, vel, vel) + float(vel @ shape @ vel) * nu
        dvecs = -np.einsum("kij,i,aj->ak", gamma, vel, vecs) + np.outer(vecs @ shape @ vel, nu)
        return np.concatenate([vel, acc, dvecs.ravel()])

    y0 = np.concatenate([x, direction] + [np.asarray(v, dtype=float) for v in transported])
    sol = solve_ivp(rhs, (0.0, length), y0, method="DOP853",
                    rtol=config.geodesic_rtol, atol=config.geodesic_atol)
    if not sol.success:
        raise IntegrationFailureError(float(sol.t[-1]), f"geodesic shooting: {sol.message}")

    end = reproject(model, sol.y[:n, -1], level, config.reprojection_tolerance)
    vecs = sol.y[2 * n:, -1].reshape(m, n)
    if m:
        vecs = _tangent_project(model, end, vecs)
    return end, vecs


def flow_line(model: SolitonModel, x: np.ndarray, delta: float,
              config: Optional[LevelSetConfig] = None) -> np.ndarray:
    """Point reached from x by the flow of ∇f/|∇f|^2 for level increment delta."""
    config = config or DEFAULT_CONFIG
    if delta == 0.0:
        return np.array(x, dtype=float)
    level = _potential_value(model, x).value
    sol = solve_ivp(lambda s, y: flow_vector(model, y), (0.0, delta), np.asarray(x, dtype=float),
                    method="DOP853", rtol=config.geodesic_rtol, atol=config.geodesic_atol)
    if not sol.success:
        raise IntegrationFailureError(float(sol.t[-1]), f"flow line: {sol.message}")
    return reproject(model, sol.y[:, -1], level + delta, config.reprojection_tolerance)


# ============================================================================
# Stencils
# ============================================================================

class AmbientStencil:
    """Central differences along chart axes with per-axis steps step/sqrt(g_aa)."""

    def __init__(self, model: SolitonModel, frame: LevelSetFrame, step: float,
                 config: Optional[LevelSetConfig] = None):
        self.model = model
        self.frame = frame
        self.step = step
        self.config = config or DEFAULT_CONFIG
        self.steps = step / np.sqrt(np.diag(frame.metric))
        self._base = frame.point.as_array()
        self._frames: Dict[Tuple, LevelSetFrame] = {}

    def _frame(self, offsets: Tuple[Tuple[int, int], ...], gradients: bool) -> LevelSetFrame:
        if not offsets and (self.frame.grad_R is not None or not gradients):
            return self.frame
        key = (offsets, gradients)
        if key not in self._frames:
            cached = self._frames.get((offsets, True))
            if cached is not None:
                return cached
            x = self._base.copy()
            for axis, sign in offsets:
                x[axis] += sign * self.steps[axis]
            self._frames[key] = frame_at(self.model, _as_point(x), self.config, with_gradients=gradients)
        return self._frames[key]

    def _value(self, field: GeometricField, *offsets: Tuple[int, int]) -> float:
        return field.evaluate(self._frame(tuple(sorted(offsets)), field.needs_curvature_gradient))

    def gradient(self, field: GeometricField) -> np.ndarray:
        """dQ in chart components."""
        n = len(self._base)
        return np.array([
            (self._value(field, (a, 1)) - self._value(field, (a, -1))) / (2.0 * self.steps[a])
            for a in range(n)
        ])

    def second_partials(self, field: GeometricField) -> np.ndarray:
        n = len(self._base)
        q0 = self._value(field)
        out = np.zeros((n, n))
        for a in range(n):
            ha = self.steps[a]
            out[a, a] = (self._value(field, (a, 1)) - 2.0 * q0 + self._value(field, (a, -1))) / ha ** 2
            for b in range(a + 1, n):
                hb = self.steps[b]
                mixed = (
                    self._value(field, (a, 1), (b, 1)) - self._value(field, (a, 1), (b, -1))
                    - self._value(field, (a, -1), (b, 1)) + self._value(field, (a, -1), (b, -1))
                ) / (4.0 * ha * hb)
                out[a, b] = out[b, a] = mixed
        return out

    def hessian(self, field: GeometricField) -> np.ndarray:
        """Hess_M Q = ∂∂Q - Γ dQ (chart components)."""
        gamma = self.frame.geometry.christoffel.value
        return self.second_partials(field) - np.einsum("kij,k->ij", gamma, self.gradient(field))

    def laplacian(self, field: GeometricField) -> float:
        return float(np.einsum("ij,ij->", self.frame.geometry.inverse.value, self.hessian(field)))

    def frame_gradient(self, field: GeometricField) -> np.ndarray:
        """(e1 Q, e2 Q, ν Q)."""
        return self.frame.basis().T @ self.gradient(field)

    def frame_hessian(self, field: GeometricField) -> np.ndarray:
        basis = self.frame.basis()
        return basis.T @ self.hessian(field) @ basis

    def flow_derivative(self, field: GeometricField) -> float:
        """⟨∇Q, ∇f⟩/|∇f|^2."""
        return float(self.gradient(field) @ self.frame.flow_vector)

    def normal_derivative(self, field: GeometricField) -> float:
        return float(self.gradient(field) @ self.frame.nu)


class SurfaceStencil:
    """
    Central differences along Σ-geodesics in the directions e1, e2 and
    (e1 ± e2)/sqrt(2); e1, e2 are parallel-transported along each shot.
    """

    def __init__(self, model: SolitonModel, frame: LevelSetFrame, step: float,
                 config: Optional[LevelSetConfig] = None):
        self.model = model
        self.frame = frame
        self.step = step
        self.config = config or DEFAULT_CONFIG
        root_half = np.sqrt(0.5)
        self.directions = {
            "e1": frame.e1,
            "e2": frame.e2,
            "u": root_half * (frame.e1 + frame.e2),
            "w": root_half * (frame.e1 - frame.e2),
        }
        self._shots: Dict[Tuple[str, int], Tuple[np.ndarray, np.ndarray]] = {}
        self._frames: Dict[Tuple[str, int, bool], LevelSetFrame] = {}

    def shot(self, name: str, sign: int) -> Tuple[np.ndarray, np.ndarray]:
        key = (name, sign)
        if key not in self._shots:
            self._shots[key] = shoot_geodesic(
                self.model, self.frame.point.as_array(), sign * self.directions[name], self.step,
                [self.frame.e1, self.frame.e2], self.config,
            )
        return self._shots[key]

    def endpoint_frame(self, name: str, sign: int, gradients: bool = False) -> LevelSetFrame:
        if (name, sign, True) in self._frames:
            return self._frames[(name, sign, True)]
        key = (name, sign, gradients)
        if key not in self._frames:
            x, _ = self.shot(name, sign)
            self._frames[key] = frame_at(self.model, _as_point(x), self.config, with_gradients=gradients)
        return self._frames[key]

    def _value(self, field: GeometricField, name: str, sign: int) -> float:
        return field.evaluate(self.endpoint_frame(name, sign, field.needs_curvature_gradient))

    def _first(self, field: GeometricField, name: str) -> float:
        return (self._value(field, name, 1) - self._value(field, name, -1)) / (2.0 * self.step)

    def _second(self, field: GeometricField, name: str, q0: float) -> float:
        return (self._value(field, name, 1) - 2.0 * q0 + self._value(field, name, -1)) / self.step ** 2

    def gradient(self, field: GeometricField) -> np.ndarray:
        """(e1 Q, e2 Q)."""
        return np.array([self._first(field, "e1"), self._first(field, "e2")])

    def hessian(self, field: GeometricField) -> np.ndarray:
        """Surface Hessian in (e1, e2); the mixed entry comes from polarization."""
        q0 = field.evaluate(self.frame)
        d11 = self._second(field, "e1", q0)
        d22 = self._second(field, "e2", q0)
        d12 = 0.5 * (self._second(field, "u", q0) - self._second(field, "w", q0))
        return np.array([[d11, d12], [d12, d22]])

    def laplacian(self, field: GeometricField) -> float:
        return float(np.trace(self.hessian(field)))

    def shape_at(self, name: str, sign: int) -> np.ndarray:
        """h(E_j, E_k) at a shot endpoint with the transported frame."""
        _, vecs = self.shot(name, sign)
        frame = self.endpoint_frame(name, sign)
        return vecs @ frame.shape_form @ vecs.T

    def shape_gradient(self) -> np.ndarray:
        """∇_i h_jk, index order [i, j, k]."""
        return np.array([
            (self.shape_at(name, 1) - self.shape_at(name, -1)) / (2.0 * self.step)
            for name in ("e1", "e2")
        ])

    def shape_laplacian(self) -> np.ndarray:
        """Δh_jk."""
        h0 = self.frame.shape_matrix()
        return sum(
            (self.shape_at(name, 1) - 2.0 * h0 + self.shape_at(name, -1)) / self.step ** 2
            for name in ("e1", "e2")
        )


# ============================================================================
# Subnormal chart
# ============================================================================

class SubnormalChart:
    """
    Chart (x0, x1, x2) around p: (x1, x2) are normal coordinates on Σ_t
    along the principal directions, x0 = f is reached by the flow of
    ∇f/|∇f|^2, so ∂_0 is the flow vector and commutes with ∂_1, ∂_2.
    """

    def __init__(self, model: SolitonModel, frame: LevelSetFrame, extent: float,
                 config: Optional[LevelSetConfig] = None):
        frame.require_principal("subnormal chart axes")
        self.model = model
        self.frame = frame
        self.extent = extent
        self.config = config or DEFAULT_CONFIG
        self._points: Dict[Tuple[float, float, float], np.ndarray] = {}
        self._lock = Lock()

    @property
    def origin(self) -> Tuple[float, float, float]:
        return (self.frame.level, 0.0, 0.0)

    def _check(self, coords: Tuple[float, float, float]) -> None:
        x0, x1, x2 = coords
        if (max(abs(x1), abs(x2)) > self.extent
                or abs(x0 - self.frame.level) > self.extent * self.frame.grad_norm):
            raise ChartExtentError(coords, self.extent)

    def position(self, coords: Sequence[float]) -> np.ndarray:
        coords = tuple(float(c) for c in coords)
        self._check(coords)
        with self._lock:
            cached = self._points.get(coords)
        if cached is not None:
            return cached

        x0, x1, x2 = coords
        base = self.frame.point.as_array()
        length = float(np.hypot(x1, x2))
        y = base
        if length > 0.0:
            direction = (x1 * self.frame.e1 + x2 * self.frame.e2) / length
            y, _ = shoot_geodesic(self.model, base, direction, length, (), self.config)
        y = flow_line(self.model, y, x0 - self.frame.level, self.config)

        with self._lock:
            self._points[coords] = y
        return y

    def point(self, coords: Sequence[float]) -> ChartPoint:
        return _as_point(self.position(coords))

    def coordinate_frame(self, coords: Sequence[float], eps: float,
                         axes: Sequence[int] = (0, 1, 2)) -> np.ndarray:
        """Columns ∂_a (a in axes) in model chart components, by central differences."""
        coords = np.asarray(coords, dtype=float)
        widths = [eps * self.frame.grad_norm, eps, eps]
        columns = []
        for a in axes:
            width = widths[a]
            shift = np.zeros(3)
            shift[a] = width
            columns.append((self.position(coords + shift) - self.position(coords - shift)) / (2.0 * width))
        return np.column_stack(columns)

    def metric_at(self, coords: Sequence[float], eps: float) -> np.ndarray:
        frame = frame_at(self.model, self.point(coords), self.config)
        J = self.coordinate_frame(coords, eps)
        return J.T @ frame.metric @ J

    def shape_components(self, coords: Sequence[float], eps: float) -> np.ndarray:
        """h(∂_i, ∂_j), i, j in {1, 2}, on the level set through the chart point."""
        frame = frame_at(self.model, self.point(coords), self.config)
        J = self.coordinate_frame(coords, eps, axes=(1, 2))
        return J.T @ frame.shape_form @ J


def subnormal_chart(model: SolitonModel, p: ChartPoint, extent: float,
                    config: Optional[LevelSetConfig] = None) -> SubnormalChart:
    return SubnormalChart(model, frame_at(model, p, config), extent, config)


# ============================================================================
# Probe and samples
# ============================================================================

class LevelSetProbe:
    """Frame, stencils and charts at one point, cached per step."""

    def __init__(self, model: SolitonModel, p: ChartPoint, config: Optional[LevelSetConfig] = None):
        self.model = model
        self.point = p
        self.config = config or DEFAULT_CONFIG
        self.frame = frame_at(model, p, self.config, with_gradients=True)
        self.default_step = default_step(self.frame, self.config)
        self._ambient: Dict[float, AmbientStencil] = {}
        self._surface: Dict[float, SurfaceStencil] = {}
        self._charts: Dict[float, SubnormalChart] = {}

    def ambient(self, step: Optional[float] = None) -> AmbientStencil:
        step = step or self.default_step
        if step not in self._ambient:
            self._ambient[step] = AmbientStencil(self.model, self.frame, step, self.config)
        return self._ambient[step]

    def surface(self, step: Optional[float] = None) -> SurfaceStencil:
        step = step or self.default_step
        if step not in self._surface:
            self._surface[step] = SurfaceStencil(self.model, self.frame, step, self.config)
        return self._surface[step]

    def chart(self, extent: Optional[float] = None) -> SubnormalChart:
        extent = extent or 10.0 * self.default_step
        if extent not in self._charts:
            self._charts[extent] = SubnormalChart(self.model, self.frame, extent, self.config)
        return self._charts[extent]

    def trajectory_flow_derivative(self, field: GeometricField, step: Optional[float] = None) -> float:
        """Central difference of Q along the integrated flow line; step in level units."""
        delta = step or self.default_step * self.frame.grad_norm
        x = self.point.as_array()
        values = []
        for sign in (1.0, -1.0):
            end = flow_line(self.model, x, sign * delta, self.config)
            frame = frame_at(self.model, _as_point(end), self.config,
                             with_gradients=field.needs_curvature_gradient)
            values.append(field.evaluate(frame))
        return (values[0] - values[1]) / (2.0 * delta)


@dataclass(frozen=True)
class SurfaceFieldSample:
    """Value and first/second derivatives of a field at one point."""

    value: float
    tangential_gradient: np.ndarray  # (e1 Q, e2 Q) from geodesic differences
    surface_laplacian: float  # ambient identity
    surface_hessian: np.ndarray  # 2x2 in (e1, e2), geodesic differences
    ambient_gradient: np.ndarray  # dQ, chart components
    ambient_frame_gradient: np.ndarray  # (e1 Q, e2 Q, ν Q)
    flow_derivative: float
    normal_derivative: float
    step: float

    @property
    def geodesic_laplacian(self) -> float:
        return float(np.trace(self.surface_hessian))


def surface_laplacian_identity(ambient: AmbientStencil, field: GeometricField) -> float:
    """Δ_Σ Q = Δ_M Q - Hess Q(ν, ν) + H ∂_ν Q."""
    frame = ambient.frame
    nu = frame.nu
    return (
        ambient.laplacian(field)
        - float(nu @ ambient.hessian(field) @ nu)
        + frame.H * ambient.normal_derivative(field)
    )


def field_sample(
    model: SolitonModel,
    p: ChartPoint,
    field: GeometricField,
    step: Optional[float] = None,
    config: Optional[LevelSetConfig] = None,
    probe: Optional[LevelSetProbe] = None,
) -> SurfaceFieldSample:
    """Sample a field with both stencils at one point."""
    probe = probe or LevelSetProbe(model, p, config)
    step = step or probe.default_step
    ambient = probe.ambient(step)
    surface = probe.surface(step)
    logger.debug(f"field_sample {field.key} on {model.name} at {p.coords} (step {step:.3e})")
    return SurfaceFieldSample(
        value=field.evaluate(probe.frame),
        tangential_gradient=surface.gradient(field),
        surface_laplacian=surface_laplacian_identity(ambient, field),
        surface_hessian=surface.hessian(field),
        ambient_gradient=ambient.gradient(field),
        ambient_frame_gradient=ambient.frame_gradient(field),
        flow_derivative=ambient.flow_derivative(field),
        normal_derivative=ambient.normal_derivative(field),
        step=step,
    )


def trajectory_flow_derivative(
    model: SolitonModel,
    p: ChartPoint,
    field: GeometricField,
    step: Optional[float] = None,
    config: Optional[LevelSetConfig] = None,
) -> float:
    return LevelSetProbe(model, p, config).trajectory_flow_derivative(field, step)
