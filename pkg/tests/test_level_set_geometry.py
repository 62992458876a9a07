"""
Unit Tests for Level-Set Geometry
=================================

Adapted frames, principal curvatures, the weight λ and Θ, the umbilical
ratio and the tensor L on cigar x R, where everything is explicit:
at rho = 1, |∇f|^2 = 2, H = 1/sqrt(2), λ = Θ = 1 and U_0 = 1.
"""

import pytest
import sys
import os
import math

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from soliton_lab.backend.chart_geometry import ChartPoint
from soliton_lab.backend.lab_exceptions import (
    EigenvectorDegenerateError,
    GradientCriticalError,
    MeanCurvatureDegenerateError,
    UnsupportedModelError,
)
from soliton_lab.backend.level_set_geometry import (
    FieldKind,
    GeometricField,
    LevelSetConfig,
    L_tensor,
    MEAN_CURVATURE,
    POTENTIAL,
    frame_at,
    parse_field,
    principal_axes,
    umbilical_ratio,
)


# ============================================================================
# Fixtures
# ============================================================================

@pytest.fixture
def unit_point():
    return ChartPoint((1.0, 0.0, 0.0))


@pytest.fixture
def unit_frame(cigarxr, unit_point):
    return frame_at(cigarxr, unit_point, with_gradients=True)


# ============================================================================
# Frame
# ============================================================================

@pytest.mark.unit
class TestFrameAtUnitRadius:
    """Closed-form values on cigar x R at rho = 1."""

    def test_gradient_norm(self, unit_frame):
        assert unit_frame.grad_norm_sq == pytest.approx(2.0, rel=1e-13)

    def test_principal_curvatures(self, unit_frame):
        assert unit_frame.kappa1 == pytest.approx(0.0, abs=1e-13)
        assert unit_frame.kappa2 == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-13)
        assert unit_frame.H == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-13)
        assert not unit_frame.umbilical

    def test_weight_and_theta(self, unit_frame):
        assert unit_frame.lam == pytest.approx(1.0, rel=1e-12)
        assert unit_frame.theta == pytest.approx(1.0, rel=1e-12)

    def test_ricci_components(self, unit_frame):
        assert unit_frame.R == pytest.approx(2.0, rel=1e-13)
        assert unit_frame.R_nunu == pytest.approx(1.0, rel=1e-13)
        assert unit_frame.R22 - unit_frame.R11 == pytest.approx(1.0, rel=1e-12)

    def test_umbilical_ratio(self, cigarxr, unit_point, unit_frame):
        assert unit_frame.umbilical_ratio(0.0) == pytest.approx(1.0, rel=1e-12)
        assert umbilical_ratio(cigarxr, unit_point, 2.0) == pytest.approx(2.0, rel=1e-12)

    def test_basis_is_orthonormal(self, unit_frame):
        basis = unit_frame.basis()
        assert np.allclose(basis.T @ unit_frame.metric @ basis, np.eye(3), atol=1e-13)

    def test_shape_matrix_is_diagonal(self, unit_frame):
        h = unit_frame.shape_matrix()
        assert h[0, 1] == pytest.approx(0.0, abs=1e-13)
        assert np.trace(h) == pytest.approx(unit_frame.H, rel=1e-13)

    def test_curvature_gradient_is_normal(self, unit_frame):
        e1R, e2R, nuR = unit_frame.curvature_gradient_frame()
        assert abs(e1R) < 1e-12 and abs(e2R) < 1e-12
        assert abs(nuR) == pytest.approx(math.sqrt(8.0), rel=1e-12)

    def test_frame_without_gradients(self, cigarxr, unit_point):
        frame = frame_at(cigarxr, unit_point)
        with pytest.raises(ValueError, match="without curvature gradients"):
            frame.curvature_gradient_frame()


@pytest.mark.unit
class TestFrameErrors:
    """Tests for points where the frame is undefined."""

    def test_two_dimensional_model(self, cigar):
        with pytest.raises(UnsupportedModelError):
            frame_at(cigar, ChartPoint((1.0, 0.0)))

    def test_critical_point(self, euclidean):
        with pytest.raises(GradientCriticalError):
            frame_at(euclidean, ChartPoint((0.2, 0.3, 0.4)))

    def test_round_spheres_are_umbilical(self, flat_spheres):
        frame = frame_at(flat_spheres, ChartPoint((0.0, 2.0, 0.0)))
        assert frame.umbilical
        assert frame.H == pytest.approx(1.0, rel=1e-13)
        with pytest.raises(EigenvectorDegenerateError):
            principal_axes(frame)

    def test_flat_spheres_have_no_weight(self, flat_spheres):
        frame = frame_at(flat_spheres, ChartPoint((1.0, 1.0, 0.0)))
        assert frame.lam is None
        assert frame.theta is None

    def test_mean_curvature_cutoff(self, cigarxr, unit_point):
        config = LevelSetConfig(mean_curvature_cutoff=10.0)
        with pytest.raises(MeanCurvatureDegenerateError):
            umbilical_ratio(cigarxr, unit_point, 0.0, config)

    def test_frame_reports_its_own_cutoff(self, cigarxr, unit_point):
        config = LevelSetConfig(mean_curvature_cutoff=10.0)
        frame = frame_at(cigarxr, unit_point, config)
        with pytest.raises(MeanCurvatureDegenerateError, match="cutoff 1.0e\\+01") as info:
            frame.require_mean_curvature()
        assert info.value.cutoff == 10.0

    def test_config_rejects_nonpositive(self):
        with pytest.raises(ValueError, match="gradient_cutoff"):
            LevelSetConfig(gradient_cutoff=0.0)


# ============================================================================
# Tensor L
# ============================================================================

@pytest.mark.unit
class TestLTensor:
    """L = 2 dR⊗dR - |∇R|^2 g and its (e2, e2) readings."""

    def test_full_and_reduced_readings(self, cigarxr, unit_point):
        L = L_tensor(cigarxr, unit_point)
        assert L.grad_R_norm_sq == pytest.approx(8.0, rel=1e-12)
        assert L.l22 == pytest.approx(-8.0, rel=1e-12)
        assert L.l22_reduced == pytest.approx(0.0, abs=1e-12)
        assert L.l22_discrepancy == pytest.approx(-8.0, rel=1e-12)

    def test_trace(self, cigarxr, unit_point):
        assert L_tensor(cigarxr, unit_point).trace() == pytest.approx(-8.0, rel=1e-12)

    def test_frame_error_is_kept(self, euclidean):
        L = L_tensor(euclidean, ChartPoint((0.1, 0.1, 0.1)))
        assert L.trace() == 0.0
        with pytest.raises(GradientCriticalError):
            L.l22


# ============================================================================
# Fields
# ============================================================================

@pytest.mark.unit
class TestGeometricFields:
    """Tests for field parsing and evaluation."""

    def test_parse_u_sigma(self):
        field = parse_field("U_sigma(2)")
        assert field.kind == FieldKind.U_SIGMA
        assert field.sigma == 2.0
        assert field.key == "U_sigma[2.0]"

    def test_parse_plain(self):
        assert parse_field(" lambda ").kind == FieldKind.LAMBDA

    def test_parse_unknown(self):
        with pytest.raises(ValueError, match="Unknown field"):
            parse_field("curvature")

    def test_u_sigma_requires_sigma(self):
        with pytest.raises(ValueError, match="needs sigma"):
            GeometricField(FieldKind.U_SIGMA)

    def test_evaluate(self, unit_frame):
        assert MEAN_CURVATURE.evaluate(unit_frame) == unit_frame.H
        assert POTENTIAL.evaluate(unit_frame) == pytest.approx(-math.log(2.0), rel=1e-13)
        assert parse_field("L22").evaluate(unit_frame) == pytest.approx(0.0, abs=1e-12)
