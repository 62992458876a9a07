"""
Soliton Models Module
=====================

Steady gradient Ricci soliton fixtures as jet providers:

1. cigar: (dx^2 + dy^2)/(1 + x^2 + y^2), f = -log(1 + x^2 + y^2)
2. cigar x R: the cigar times a flat line (the collapsed 3-d example)
3. euclidean: flat space with f = 0
4. flat spheres: flat R^3 with f = -|x|^2/2 (not a soliton; used to
   calibrate the surface operators on round spheres)

The Bryant soliton is numerically constructed in ``bryant.py`` and
wrapped in the same ``SolitonModel`` type.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .chart_geometry import ChartPoint, CurvatureJets, MetricJet, ScalarJet
from .lab_exceptions import InsufficientJetOrderError, PreconditionError, UnsupportedModelError
from .model_jets import (
    cigar_conformal_derivatives,
    cigar_potential_derivatives,
    conformal_metric_terms,
    embed_terms,
    radial_scalar_terms,
)

logger = logging.getLogger(__name__)

Region = Tuple[float, float]
Sampler = Callable[[np.random.Generator, int, Region], List[ChartPoint]]


@dataclass(frozen=True)
class SolitonModel:
    """A named provider of metric and potential jets."""

    name: str
    dimension: int
    soliton_constant: float
    hamilton_constant: float
    metric_provider: Callable[[ChartPoint, int], MetricJet]
    potential_provider: Callable[[ChartPoint, int], ScalarJet]
    critical_set: str
    max_jet_order: int = 4
    is_soliton: bool = True
    exact: bool = True  # closed-form jets (False for ODE-built models)
    default_region: Region = (0.0, 1.0)
    sampler: Optional[Sampler] = None
    radial_distance_fn: Optional[Callable[[ChartPoint], float]] = None
    ray_point_fn: Optional[Callable[[float], ChartPoint]] = None

    def _check(self, p: ChartPoint, order: int, what: str) -> None:
        if p.dimension != self.dimension:
            raise ValueError(
                f"Point of dimension {p.dimension} given to {self.dimension}-d model {self.name}"
            )
        if order > self.max_jet_order:
            raise InsufficientJetOrderError(order, self.max_jet_order, f"{self.name} {what} jet")

    def metric_jet(self, p: ChartPoint, order: int) -> MetricJet:
        self._check(p, order, "metric")
        return self.metric_provider(p, order)

    def potential_jet(self, p: ChartPoint, order: int) -> ScalarJet:
        self._check(p, order, "potential")
        return self.potential_provider(p, order)

    def geometry(self, p: ChartPoint, order: int, potential_order: Optional[int] = None) -> CurvatureJets:
        """Curvature pipeline at p from a metric jet of ``order``."""
        if potential_order is None:
            potential_order = min(order, self.max_jet_order)
        return CurvatureJets(self.metric_jet(p, order), self.potential_jet(p, potential_order))

    def sample_points(self, rng: np.random.Generator, count: int,
                      region: Optional[Region] = None) -> List[ChartPoint]:
        if self.sampler is None:
            raise UnsupportedModelError(self.name, "point sampling")
        return self.sampler(rng, count, region or self.default_region)

    def ray_point(self, r: float) -> ChartPoint:
        """Point at distance r from the distinguished point along a fixed ray."""
        if self.ray_point_fn is None:
            raise UnsupportedModelError(self.name, "radial ray")
        return self.ray_point_fn(r)


def radial_distance(model: SolitonModel, p: ChartPoint) -> float:
    """Geodesic distance from the model's distinguished point."""
    if model.radial_distance_fn is None:
        raise UnsupportedModelError(model.name, "radial_distance")
    return model.radial_distance_fn(p)


# ============================================================================
# Cigar
# ============================================================================

def _cigar_q(p: ChartPoint) -> float:
    x, y = p.coords[0], p.coords[1]
    return x * x + y * y


def _cigar_metric_terms(p: ChartPoint, order: int) -> List[np.ndarray]:
    x = np.array(p.coords[:2])
    u = radial_scalar_terms(x, 2, cigar_conformal_derivatives(_cigar_q(p), order), order)
    return conformal_metric_terms(u, 2)


def _cigar_potential_terms(p: ChartPoint, order: int) -> List[np.ndarray]:
    x = np.array(p.coords[:2])
    return radial_scalar_terms(x, 2, cigar_potential_derivatives(_cigar_q(p), order), order)


def _disk_sampler(rng: np.random.Generator, count: int, region: Region) -> List[ChartPoint]:
    """Uniform in area on the annulus region[0] <= rho <= region[1]."""
    lo, hi = region
    rho = np.sqrt(rng.uniform(lo * lo, hi * hi, size=count))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return [ChartPoint((r * np.cos(a), r * np.sin(a))) for r, a in zip(rho, angle)]


def cigar_model() -> SolitonModel:
    """Hamilton's cigar, analytic jets to order 4, C0 = 4."""
    return SolitonModel(
        name="cigar",
        dimension=2,
        soliton_constant=0.0,
        hamilton_constant=4.0,
        metric_provider=lambda p, k: MetricJet.from_terms(_cigar_metric_terms(p, k), p),
        potential_provider=lambda p, k: ScalarJet.from_terms(_cigar_potential_terms(p, k), p),
        critical_set="origin rho = 0",
        default_region=(0.0, 10.0),
        sampler=_disk_sampler,
        radial_distance_fn=lambda p: float(np.arcsinh(np.hypot(p.coords[0], p.coords[1]))),
        ray_point_fn=lambda r: ChartPoint((float(np.sinh(r)), 0.0)),
    )


# ============================================================================
# Cigar x R
# ============================================================================

_LINE_METRIC = np.diag([0.0, 0.0, 1.0])


def _cylinder_sampler(rng: np.random.Generator, count: int, region: Region) -> List[ChartPoint]:
    """rho uniform in region, z uniform in [-1, 1]."""
    lo, hi = region
    rho = rng.uniform(lo, hi, size=count)
    angle = rng.uniform(0.0, 2.0 * np.pi, size=count)
    z = rng.uniform(-1.0, 1.0, size=count)
    return [ChartPoint((r * np.cos(a), r * np.sin(a), h)) for r, a, h in zip(rho, angle, z)]


def cigar_cross_line_model() -> SolitonModel:
    """Cigar x R in the global chart (x, y, z); the cigar block is copied from the cigar jets."""
    return SolitonModel(
        name="cigarxr",
        dimension=3,
        soliton_constant=0.0,
        hamilton_constant=4.0,
        metric_provider=lambda p, k: MetricJet.from_terms(
            embed_terms(_cigar_metric_terms(p, k), 3, 2, _LINE_METRIC), p),
        potential_provider=lambda p, k: ScalarJet.from_terms(
            embed_terms(_cigar_potential_terms(p, k), 3, 0), p),
        critical_set="axis rho = 0",
        default_region=(0.3, 3.0),
        sampler=_cylinder_sampler,
        radial_distance_fn=lambda p: float(np.arcsinh(np.hypot(p.coords[0], p.coords[1]))),
        ray_point_fn=lambda r: ChartPoint((float(np.sinh(r)), 0.0, 0.0)),
    )


# ============================================================================
# Flat fixtures
# ============================================================================

def _make_box_sampler(dim: int) -> Sampler:
    def sampler(rng: np.random.Generator, count: int, region: Region) -> List[ChartPoint]:
        lo, hi = region
        pts = rng.uniform(lo, hi, size=(count, dim))
        return [ChartPoint(tuple(row)) for row in pts]
    return sampler


def euclidean_model(dim: int = 3) -> SolitonModel:
    """Flat R^dim with f = 0 (every point is critical)."""
    if dim not in (2, 3):
        raise PreconditionError(f"euclidean_model needs dim in {{2, 3}}, got {dim}")

    def metric(p: ChartPoint, order: int) -> MetricJet:
        terms = [np.eye(dim)] + [np.zeros((dim,) * (k + 2)) for k in range(1, order + 1)]
        return MetricJet.from_terms(terms, p)

    def potential(p: ChartPoint, order: int) -> ScalarJet:
        terms = [np.asarray(0.0)] + [np.zeros((dim,) * k) for k in range(1, order + 1)]
        return ScalarJet.from_terms(terms, p)

    return SolitonModel(
        name="euclidean" if dim == 3 else "euclidean2",
        dimension=dim,
        soliton_constant=0.0,
        hamilton_constant=0.0,
        metric_provider=metric,
        potential_provider=potential,
        critical_set="all points",
        default_region=(-1.0, 1.0),
        sampler=_make_box_sampler(dim),
    )


def _shell_sampler(rng: np.random.Generator, count: int, region: Region) -> List[ChartPoint]:
    lo, hi = region
    radius = rng.uniform(lo, hi, size=count)
    direction = rng.normal(size=(count, 3))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    return [ChartPoint(tuple(r * d)) for r, d in zip(radius, direction)]


def flat_spheres_model() -> SolitonModel:
    """Flat R^3 with f = -|x|^2/2: level sets are round spheres (not a soliton)."""

    def metric(p: ChartPoint, order: int) -> MetricJet:
        terms = [np.eye(3)] + [np.zeros((3,) * (k + 2)) for k in range(1, order + 1)]
        return MetricJet.from_terms(terms, p)

    def potential(p: ChartPoint, order: int) -> ScalarJet:
        x = p.as_array()
        q = float(x @ x)
        return ScalarJet.from_terms(radial_scalar_terms(x, 3, [-0.5 * q, -0.5, 0.0, 0.0, 0.0], order), p)

    return SolitonModel(
        name="flat_spheres",
        dimension=3,
        soliton_constant=0.0,
        hamilton_constant=float("nan"),
        metric_provider=metric,
        potential_provider=potential,
        critical_set="origin",
        is_soliton=False,
        default_region=(0.5, 2.0),
        sampler=_shell_sampler,
        radial_distance_fn=lambda p: float(np.linalg.norm(p.as_array())),
        ray_point_fn=lambda r: ChartPoint((float(r), 0.0, 0.0)),
    )
