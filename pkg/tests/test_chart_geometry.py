"""
Unit Tests for the Curvature Pipeline
=====================================

Christoffel symbols, Riemann/Ricci/scalar curvature and covariant
derivatives on metrics whose curvature is known in closed form.
"""

import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from soliton_lab.backend.chart_geometry import (
    ChartPoint,
    CurvatureJets,
    MetricJet,
    ScalarJet,
    TensorJet,
    bianchi_residuals,
    christoffel,
    frame_components,
    gradient_norm_sq,
    laplacian,
    orthonormal_frame,
    ricci,
    riemann,
    scalar_curvature,
    scalar_curvature_gradient,
)
from soliton_lab.backend.lab_exceptions import DegenerateMetricError, InsufficientJetOrderError
from soliton_lab.backend.model_jets import conformal_metric_terms, radial_scalar_terms


# ============================================================================
# Fixtures
# ============================================================================

def round_sphere_jet(x, y, order=4):
    """Stereographic round sphere g = 4/(1+q)^2 δ, K = 1."""
    q = x * x + y * y
    s = 1.0 + q
    derivs = []
    fact = 1.0
    for k in range(order + 1):
        fact *= (k + 1)
        derivs.append(4.0 * (-1.0) ** k * fact / s ** (k + 2))
    u = radial_scalar_terms(np.array([x, y]), 2, derivs, order)
    return MetricJet.from_terms(conformal_metric_terms(u, 2), ChartPoint((x, y)))


def flat_jet(dim=3, order=4):
    terms = [np.eye(dim)] + [np.zeros((dim,) * (k + 2)) for k in range(1, order + 1)]
    return MetricJet.from_terms(terms, ChartPoint((0.0,) * dim))


@pytest.fixture
def sphere_jet():
    return round_sphere_jet(0.4, -0.7)


# ============================================================================
# Jets and points
# ============================================================================

@pytest.mark.unit
class TestJetContainers:
    """Tests for jet validation."""

    def test_chart_point_rejects_nan(self):
        with pytest.raises(ValueError, match="non-finite"):
            ChartPoint((0.0, float("nan")))

    def test_degenerate_metric_raises(self):
        with pytest.raises(DegenerateMetricError):
            MetricJet.from_terms([np.diag([1.0, 0.0])])

    def test_asymmetric_metric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            MetricJet.from_terms([np.array([[1.0, 0.5], [0.0, 1.0]])])

    def test_order_mismatch_rejected(self):
        with pytest.raises(ValueError, match="missing derivative"):
            MetricJet(order=1, g=np.eye(2))

    def test_insufficient_order_for_riemann(self):
        jet = MetricJet.from_terms([np.eye(2), np.zeros((2, 2, 2))])
        with pytest.raises(InsufficientJetOrderError):
            riemann(jet)

    def test_tensor_jet_inverse(self):
        jet = round_sphere_jet(0.2, 0.3, order=2)
        inverse = jet.tensor_jet().inverse()
        assert np.allclose(inverse.value @ jet.g, np.eye(2), atol=1e-14)

    def test_tensor_jet_truncate(self):
        jet = TensorJet([np.eye(2), np.zeros((2, 2, 2)), np.zeros((2, 2, 2, 2))])
        assert jet.order == 2
        assert jet.truncate(1).order == 1


# ============================================================================
# Curvature
# ============================================================================

@pytest.mark.unit
class TestCurvature:
    """Tests for curvature on closed-form metrics."""

    def test_flat_metric_has_zero_curvature(self):
        jet = flat_jet()
        _, lowered = riemann(jet)
        assert np.abs(lowered.components).max() == 0.0
        assert scalar_curvature(jet) == 0.0
        assert np.abs(christoffel(jet).components).max() == 0.0

    def test_round_sphere_scalar_curvature(self, sphere_jet):
        assert scalar_curvature(sphere_jet) == pytest.approx(2.0, abs=1e-12)

    def test_round_sphere_ricci_is_einstein(self, sphere_jet):
        ric = ricci(sphere_jet).components
        assert np.allclose(ric, sphere_jet.g, atol=1e-12)

    def test_round_sphere_sectional_curvature_in_frame(self, sphere_jet):
        _, lowered = riemann(sphere_jet)
        frame = orthonormal_frame(sphere_jet.g)
        in_frame = frame_components(lowered.components, frame)
        assert in_frame[0, 1, 0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_constant_curvature_has_zero_gradient(self, sphere_jet):
        dR = scalar_curvature_gradient(sphere_jet).components
        assert np.abs(dR).max() < 1e-10

    def test_cigar_scalar_curvature(self, cigar):
        p = ChartPoint((0.6, 0.8))
        R = scalar_curvature(cigar.metric_jet(p, 2))
        assert R == pytest.approx(4.0 / (1.0 + 1.0), rel=1e-12)

    def test_cigar_curvature_gradient_matches_closed_form(self, cigar):
        x, y = 0.3, 0.5
        q = x * x + y * y
        jet = cigar.metric_jet(ChartPoint((x, y)), 3)
        dR = scalar_curvature_gradient(jet).components
        expected = -8.0 / (1.0 + q) ** 2 * np.array([x, y])
        assert np.allclose(dR, expected, rtol=1e-10)


@pytest.mark.unit
class TestBianchi:
    """Tests for curvature symmetries."""

    def test_sphere_symmetries(self, sphere_jet):
        check = bianchi_residuals(sphere_jet)
        assert check.antisymmetry < 1e-12
        assert check.pair_symmetry < 1e-12
        assert check.first_bianchi < 1e-12
        assert check.second_bianchi is not None

    def test_cigarxr_second_bianchi(self, cigarxr):
        jet = cigarxr.metric_jet(ChartPoint((0.7, -0.2, 0.1)), 3)
        check = bianchi_residuals(jet)
        assert check.second_bianchi < 1e-10

    def test_second_bianchi_skipped_below_order_three(self):
        check = bianchi_residuals(round_sphere_jet(0.1, 0.1, order=2))
        assert check.second_bianchi is None


@pytest.mark.unit
class TestPotential:
    """Tests for gradient, Hessian and Laplacian of a scalar."""

    def test_quadratic_potential_on_flat_space(self):
        jet = flat_jet(order=2)
        s = ScalarJet.from_terms([np.asarray(0.5), np.array([1.0, 0.0, 0.0]), np.eye(3)])
        assert laplacian(jet, s) == pytest.approx(3.0)
        assert gradient_norm_sq(jet, s) == pytest.approx(1.0)

    def test_potential_missing_raises(self):
        geometry = CurvatureJets(flat_jet(order=2))
        with pytest.raises(ValueError, match="without a potential"):
            geometry.f

    def test_orthonormal_frame(self, sphere_jet):
        frame = orthonormal_frame(sphere_jet.g)
        assert np.allclose(frame.T @ sphere_jet.g @ frame, np.eye(2), atol=1e-14)
