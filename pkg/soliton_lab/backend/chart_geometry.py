"""
Chart Geometry Module
=====================

Curvature of an n-dimensional Riemannian metric (n = 2 or 3) computed from
pointwise jets of its components in a single coordinate chart.

Everything is built on ``TensorJet``: a tensor together with its partial
derivatives up to some order. Products of jets follow the Leibniz rule and
the inverse metric is differentiated through G g = I, so derivatives of
curvature come out of the analytic model jets and never out of finite
differences.

Conventions:
- R(X, Y) = ∇_X ∇_Y - ∇_Y ∇_X - ∇_[X,Y]
- mixed components R^l_{ijk} with R(∂_i, ∂_j)∂_k = R^l_{ijk} ∂_l
- lowered components R_{ijkl} = <R(∂_i, ∂_j)∂_l, ∂_k>, so R_{ijij} is the
  sectional curvature of a unit orthogonal pair (positive on the sphere)
- Ric_{jk} = R^i_{ijk}, R = g^{jk} Ric_{jk}
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .lab_exceptions import DegenerateMetricError, InsufficientJetOrderError

logger = logging.getLogger(__name__)

# Smallest admissible metric eigenvalue
DEGENERACY_THRESHOLD = 1e-12

MAX_JET_ORDER = 4

# Derivative slots use upper-case einsum letters; tensor specs use lower case.
_DERIVATIVE_LETTERS = "ABCDEF"


# ============================================================================
# Tensor jets
# ============================================================================

class TensorJet:
    """
    A tensor field known through its partial derivatives at one point.

    ``terms[k]`` has shape ``(n,)*k + tensor_shape``; the first k axes are
    the (symmetric) differentiation indices.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Sequence[np.ndarray]):
        if not terms:
            raise ValueError("TensorJet needs at least the value term")
        self.terms: List[np.ndarray] = [np.asarray(t, dtype=float) for t in terms]

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    @property
    def value(self) -> np.ndarray:
        return self.terms[0]

    def derivative(self) -> "TensorJet":
        """Jet of the partial derivative; the new tensor index comes first."""
        if self.order < 1:
            raise InsufficientJetOrderError(1, self.order, "jet derivative")
        return TensorJet(self.terms[1:])

    def truncate(self, order: int) -> "TensorJet":
        return TensorJet(self.terms[: order + 1])

    def __add__(self, other: "TensorJet") -> "TensorJet":
        k = min(self.order, other.order)
        return TensorJet([a + b for a, b in zip(self.terms[: k + 1], other.terms[: k + 1])])

    def __sub__(self, other: "TensorJet") -> "TensorJet":
        k = min(self.order, other.order)
        return TensorJet([a - b for a, b in zip(self.terms[: k + 1], other.terms[: k + 1])])

    def scale(self, factor: float) -> "TensorJet":
        return TensorJet([factor * t for t in self.terms])

    def linear(self, spec: str) -> "TensorJet":
        """Apply an index permutation or trace, e.g. ``"iijk->jk"``, termwise."""
        src, dst = spec.split("->")
        return TensorJet([np.einsum(f"...{src}->...{dst}", t) for t in self.terms])

    def contract(self, spec: str, other: "TensorJet") -> "TensorJet":
        """
        Jet of ``einsum(spec, self, other)`` by the general Leibniz rule.

        Args:
            spec: einsum specification in lower-case letters, e.g. "kl,lij->kij"
            other: second factor

        Returns:
            Product jet of order min(self.order, other.order)
        """
        spec_a, rest = spec.split(",")
        spec_b, spec_out = rest.split("->")
        order = min(self.order, other.order)
        terms = []
        for k in range(order + 1):
            letters = _DERIVATIVE_LETTERS[:k]
            acc = None
            for size in range(k + 1):
                for subset in combinations(range(k), size):
                    left = "".join(letters[i] for i in subset)
                    right = "".join(letters[i] for i in range(k) if i not in subset)
                    piece = np.einsum(
                        f"{left}{spec_a},{right}{spec_b}->{letters}{spec_out}",
                        self.terms[size],
                        other.terms[k - size],
                    )
                    acc = piece if acc is None else acc + piece
            terms.append(acc)
        return TensorJet(terms)

    def inverse(self) -> "TensorJet":
        """Jet of the matrix inverse, from differentiating G g = I."""
        g0 = self.terms[0]
        G0 = np.linalg.inv(g0)
        inv_terms = [G0]
        for k in range(1, self.order + 1):
            letters = _DERIVATIVE_LETTERS[:k]
            acc = np.zeros((g0.shape[0],) * k + g0.shape)
            for size in range(k):
                for subset in combinations(range(k), size):
                    left = "".join(letters[i] for i in subset)
                    right = "".join(letters[i] for i in range(k) if i not in subset)
                    acc = acc + np.einsum(
                        f"{left}ij,{right}jk->{letters}ik",
                        inv_terms[size],
                        self.terms[k - size],
                    )
            inv_terms.append(-np.einsum(f"{letters}ij,jk->{letters}ik", acc, G0))
        return TensorJet(inv_terms)


# ============================================================================
# Domain types
# ============================================================================

@dataclass(frozen=True)
class ChartPoint:
    """A point of a coordinate chart."""

    coords: Tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not all(np.isfinite(coords)):
            raise ValueError(f"Chart point has non-finite coordinates: {coords}")
        object.__setattr__(self, "coords", coords)

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


@dataclass
class MetricJet:
    """Metric components and their partial derivatives up to ``order``."""

    order: int
    g: np.ndarray
    dg: Optional[np.ndarray] = None
    d2g: Optional[np.ndarray] = None
    d3g: Optional[np.ndarray] = None
    d4g: Optional[np.ndarray] = None
    point: Optional[ChartPoint] = None

    def __post_init__(self):
        if not 0 <= self.order <= MAX_JET_ORDER:
            raise ValueError(f"Jet order must be in [0, {MAX_JET_ORDER}], got {self.order}")
        self.g = np.asarray(self.g, dtype=float)
        n = self.g.shape[0]
        if self.g.shape != (n, n) or n not in (2, 3):
            raise ValueError(f"Metric must be 2x2 or 3x3, got shape {self.g.shape}")
        derivs = self._derivative_arrays()
        for k in range(1, MAX_JET_ORDER + 1):
            if k <= self.order and derivs[k - 1] is None:
                raise ValueError(f"Order {self.order} jet is missing derivative order {k}")
            if k > self.order and derivs[k - 1] is not None:
                raise ValueError(f"Order {self.order} jet carries derivative order {k}")
        if not np.allclose(self.g, self.g.T, rtol=0.0, atol=1e-14 * max(1.0, np.abs(self.g).max())):
            raise ValueError("Metric components are not symmetric")
        if not all(np.all(np.isfinite(t)) for t in self.tensor_jet().terms):
            raise DegenerateMetricError(float("nan"), DEGENERACY_THRESHOLD)
        min_eig = float(np.linalg.eigvalsh(self.g)[0])
        if min_eig < DEGENERACY_THRESHOLD:
            raise DegenerateMetricError(min_eig, DEGENERACY_THRESHOLD)

    @property
    def dimension(self) -> int:
        return self.g.shape[0]

    def _derivative_arrays(self) -> List[Optional[np.ndarray]]:
        return [self.dg, self.d2g, self.d3g, self.d4g]

    def tensor_jet(self) -> TensorJet:
        return TensorJet([self.g] + self._derivative_arrays()[: self.order])

    @classmethod
    def from_terms(cls, terms: Sequence[np.ndarray], point: Optional[ChartPoint] = None) -> "MetricJet":
        padded = list(terms) + [None] * (MAX_JET_ORDER + 1 - len(terms))
        return cls(len(terms) - 1, padded[0], *padded[1:], point=point)


@dataclass
class ScalarJet:
    """A scalar function and its partial derivatives up to ``order``."""

    order: int
    value: float
    d1: Optional[np.ndarray] = None
    d2: Optional[np.ndarray] = None
    d3: Optional[np.ndarray] = None
    d4: Optional[np.ndarray] = None
    point: Optional[ChartPoint] = None

    def __post_init__(self):
        if not 0 <= self.order <= MAX_JET_ORDER:
            raise ValueError(f"Jet order must be in [0, {MAX_JET_ORDER}], got {self.order}")
        self.value = float(self.value)

    def tensor_jet(self) -> TensorJet:
        return TensorJet([np.asarray(self.value)] + [self.d1, self.d2, self.d3, self.d4][: self.order])

    @classmethod
    def from_terms(cls, terms: Sequence[np.ndarray], point: Optional[ChartPoint] = None) -> "ScalarJet":
        padded = list(terms) + [None] * (MAX_JET_ORDER + 1 - len(terms))
        return cls(len(terms) - 1, float(padded[0]), *padded[1:], point=point)


@dataclass
class TensorValue:
    """Components of a tensor at a chart point."""

    covariant: int
    contravariant: int
    components: np.ndarray
    point: Optional[ChartPoint] = None

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=float)
        rank = self.covariant + self.contravariant
        if self.components.ndim != rank:
            raise ValueError(
                f"Component array of rank {self.components.ndim} does not match valence "
                f"({self.contravariant}, {self.covariant})"
            )
        if rank and len(set(self.components.shape)) != 1:
            raise ValueError(f"Non-square component array {self.components.shape}")


# ============================================================================
# Curvature pipeline
# ============================================================================

class CurvatureJets:
    """
    Lazily computed curvature jets of one metric (and optional potential) jet.

    A metric jet of order N gives Christoffel symbols of order N-1 and
    curvature of order N-2. Instances are not mutated after construction,
    the cached properties only fill in derived values.
    """

    def __init__(self, metric: MetricJet, potential: Optional[ScalarJet] = None):
        self.metric = metric
        self.potential = potential
        self.point = metric.point

    def _require(self, order: int, what: str) -> None:
        if self.metric.order < order:
            raise InsufficientJetOrderError(order, self.metric.order, what)

    @cached_property
    def g(self) -> TensorJet:
        return self.metric.tensor_jet()

    @cached_property
    def inverse(self) -> TensorJet:
        return self.g.inverse()

    @cached_property
    def christoffel(self) -> TensorJet:
        self._require(1, "christoffel")
        dg = self.g.derivative()
        first_kind = (dg.linear("ijl->lij") + dg.linear("jil->lij") - dg.linear("lij->lij")).scale(0.5)
        return self.inverse.contract("kl,lij->kij", first_kind)

    @cached_property
    def riemann_mixed(self) -> TensorJet:
        self._require(2, "riemann")
        gamma = self.christoffel
        d_gamma = gamma.derivative()
        return (
            d_gamma.linear("iljk->lijk")
            - d_gamma.linear("jlik->lijk")
            + gamma.contract("lim,mjk->lijk", gamma)
            - gamma.contract("ljm,mik->lijk", gamma)
        )

    @cached_property
    def riemann_lowered(self) -> TensorJet:
        return self.g.contract("km,mijl->ijkl", self.riemann_mixed)

    @cached_property
    def ricci(self) -> TensorJet:
        return self.riemann_mixed.linear("iijk->jk")

    @cached_property
    def scalar(self) -> TensorJet:
        return self.inverse.contract("jk,jk->", self.ricci)

    @cached_property
    def riemann_derivative(self) -> TensorJet:
        """Jet of ∇_m R_{ijkl}, derivative index first."""
        self._require(3, "riemann covariant derivative")
        gamma = self.christoffel
        rm = self.riemann_lowered
        return (
            rm.derivative()
            - gamma.contract("pmi,pjkl->mijkl", rm)
            - gamma.contract("pmj,ipkl->mijkl", rm)
            - gamma.contract("pmk,ijpl->mijkl", rm)
            - gamma.contract("pml,ijkp->mijkl", rm)
        )

    def covariant_hessian(self, scalar: TensorJet) -> TensorJet:
        d = scalar.derivative()
        return d.derivative() - self.christoffel.contract("kij,k->ij", d)

    def laplacian_of(self, scalar: TensorJet) -> TensorJet:
        return self.inverse.contract("ij,ij->", self.covariant_hessian(scalar))

    @cached_property
    def scalar_gradient(self) -> TensorJet:
        """Jet of dR (covariant components)."""
        self._require(3, "scalar curvature gradient")
        return self.scalar.derivative()

    @cached_property
    def scalar_laplacian(self) -> TensorJet:
        self._require(4, "scalar curvature laplacian")
        return self.laplacian_of(self.scalar)

    # Potential-dependent quantities

    @cached_property
    def f(self) -> TensorJet:
        if self.potential is None:
            raise ValueError("CurvatureJets was built without a potential jet")
        return self.potential.tensor_jet()

    @cached_property
    def df(self) -> TensorJet:
        if self.potential is None or self.potential.order < 1:
            raise InsufficientJetOrderError(1, 0 if self.potential is None else self.potential.order,
                                            "potential gradient")
        return self.f.derivative()

    @cached_property
    def hessian_f(self) -> TensorJet:
        if self.potential is None or self.potential.order < 2:
            raise InsufficientJetOrderError(2, 0 if self.potential is None else self.potential.order,
                                            "potential hessian")
        self._require(1, "hessian")
        return self.covariant_hessian(self.f)

    @cached_property
    def grad_f(self) -> TensorJet:
        return self.inverse.contract("ij,j->i", self.df)

    @cached_property
    def grad_f_norm_sq(self) -> TensorJet:
        return self.df.contract("i,i->", self.grad_f)


# ============================================================================
# Public operations
# ============================================================================

def christoffel(jet: MetricJet) -> TensorValue:
    """Γ^k_{ij} (one contravariant, two covariant indices)."""
    return TensorValue(2, 1, CurvatureJets(jet).christoffel.value, jet.point)


def riemann(jet: MetricJet) -> Tuple[TensorValue, TensorValue]:
    """
    Riemann tensor of a metric jet of order >= 2.

    Returns:
        (mixed R^l_{ijk}, lowered R_{ijkl})
    """
    geometry = CurvatureJets(jet)
    mixed = TensorValue(3, 1, geometry.riemann_mixed.value, jet.point)
    lowered = TensorValue(4, 0, geometry.riemann_lowered.value, jet.point)
    return mixed, lowered


def ricci(jet: MetricJet) -> TensorValue:
    return TensorValue(2, 0, CurvatureJets(jet).ricci.value, jet.point)


def scalar_curvature(jet: MetricJet) -> float:
    return float(CurvatureJets(jet).scalar.value)


def riemann_covariant_derivative(jet: MetricJet) -> TensorValue:
    """∇_m R_{ijkl}, derivative index first."""
    return TensorValue(5, 0, CurvatureJets(jet).riemann_derivative.value, jet.point)


def scalar_curvature_gradient(jet: MetricJet) -> TensorValue:
    return TensorValue(1, 0, CurvatureJets(jet).scalar_gradient.value, jet.point)


def scalar_curvature_laplacian(jet: MetricJet) -> float:
    return float(CurvatureJets(jet).scalar_laplacian.value)


def hessian(jet: MetricJet, s: ScalarJet) -> TensorValue:
    return TensorValue(2, 0, CurvatureJets(jet, s).hessian_f.value, jet.point)


def laplacian(jet: MetricJet, s: ScalarJet) -> float:
    geometry = CurvatureJets(jet, s)
    return float(np.einsum("ij,ij->", geometry.inverse.value, geometry.hessian_f.value))


def gradient(jet: MetricJet, s: ScalarJet) -> TensorValue:
    """Contravariant gradient g^{ij} ∂_j s."""
    return TensorValue(0, 1, CurvatureJets(jet, s).grad_f.value, jet.point)


def gradient_norm_sq(jet: MetricJet, s: ScalarJet) -> float:
    return float(CurvatureJets(jet, s).grad_f_norm_sq.value)


def inverse_metric(jet: MetricJet) -> np.ndarray:
    return np.linalg.inv(jet.g)


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns form a g-orthonormal frame (F^T g F = I), from the Cholesky factor."""
    lower = np.linalg.cholesky(g)
    return np.linalg.inv(lower).T


def frame_components(components: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """Contract every (covariant) index of ``components`` with the frame columns."""
    out = np.asarray(components, dtype=float)
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(out, frame, axes=([axis], [0])), -1, axis)
    return out


@dataclass
class BianchiCheck:
    """Relative residuals of the curvature symmetries at one point."""

    antisymmetry: float
    pair_symmetry: float
    first_bianchi: float
    second_bianchi: Optional[float] = None
    scale: float = field(default=1.0)


def bianchi_residuals(jet: MetricJet) -> BianchiCheck:
    """Relative residuals of the Riemann symmetries and both Bianchi identities."""
    geometry = CurvatureJets(jet)
    rm = geometry.riemann_lowered.value
    scale = max(float(np.abs(rm).max()), 1e-300)
    antisym = max(
        np.abs(rm + np.einsum("ijkl->jikl", rm)).max(),
        np.abs(rm + np.einsum("ijkl->ijlk", rm)).max(),
    )
    pair = np.abs(rm - np.einsum("ijkl->klij", rm)).max()
    # <R(i,j)l + R(j,l)i + R(l,i)j, k>
    first = np.abs(
        rm + np.einsum("ijkl->jlki", rm) + np.einsum("ijkl->likj", rm)
    ).max()
    second = None
    if jet.order >= 3:
        drm = geometry.riemann_derivative.value
        d_scale = max(float(np.abs(drm).max()), 1e-300)
        # ∇_m R_{ijkl} + ∇_i R_{jmkl} + ∇_j R_{mikl}
        cyclic = drm + np.einsum("ijmkl->mijkl", drm) + np.einsum("jmikl->mijkl", drm)
        second = float(np.abs(cyclic).max() / d_scale)
    return BianchiCheck(
        antisymmetry=float(antisym / scale),
        pair_symmetry=float(pair / scale),
        first_bianchi=float(first / scale),
        second_bianchi=second,
        scale=scale,
    )
