"""
Tests for Surface Calculus
==========================

Geodesic shooting, re-projection, flow lines, the two stencils and the
sub-normal chart. Round spheres in flat space (f = -|x|^2/2) calibrate
everything: H = 2/r and the coordinate function x has Δ_Σ x = -2x/r^2.
"""

import pytest
import sys
import os
import math

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from soliton_lab.backend.chart_geometry import ChartPoint
from soliton_lab.backend.lab_exceptions import ChartExtentError, EigenvectorDegenerateError
from soliton_lab.backend.level_set_geometry import MEAN_CURVATURE, GeometricField
from soliton_lab.backend.surface_calculus import (
    LevelSetProbe,
    field_sample,
    flow_line,
    reproject,
    shoot_geodesic,
    subnormal_chart,
    trajectory_flow_derivative,
)


# ============================================================================
# Fixtures
# ============================================================================

X_COORDINATE = GeometricField.custom(lambda frame: frame.point.coords[0], "x")


@pytest.fixture
def sphere_point():
    return ChartPoint((1.2, 1.6, 0.0))  # r = 2


@pytest.fixture
def sphere_probe(flat_spheres, sphere_point):
    return LevelSetProbe(flat_spheres, sphere_point)


# ============================================================================
# Curves on and across level sets
# ============================================================================

@pytest.mark.unit
class TestCurves:
    """Tests for geodesics, re-projection and flow lines."""

    def test_quarter_great_circle(self, flat_spheres):
        end, _ = shoot_geodesic(flat_spheres, np.array([2.0, 0.0, 0.0]),
                                np.array([0.0, 1.0, 0.0]), math.pi)
        assert np.allclose(end, [0.0, 2.0, 0.0], atol=1e-8)

    def test_transported_vector_stays_tangent(self, flat_spheres):
        end, vecs = shoot_geodesic(flat_spheres, np.array([2.0, 0.0, 0.0]),
                                   np.array([0.0, 1.0, 0.0]), 0.5,
                                   [np.array([0.0, 0.0, 1.0])])
        assert float(vecs[0] @ end) == pytest.approx(0.0, abs=1e-10)
        assert np.linalg.norm(vecs[0]) == pytest.approx(1.0, rel=1e-8)

    def test_reproject_onto_sphere(self, flat_spheres):
        y = reproject(flat_spheres, np.array([2.1, 0.0, 0.0]), -2.0)
        assert np.allclose(y, [2.0, 0.0, 0.0], atol=1e-12)

    def test_flow_line_changes_level(self, flat_spheres):
        y = flow_line(flat_spheres, np.array([0.0, 2.0, 0.0]), 0.5)
        assert float(y @ y) == pytest.approx(3.0, rel=1e-12)

    def test_flow_line_zero_increment(self, flat_spheres):
        x = np.array([0.0, 2.0, 0.0])
        assert np.array_equal(flow_line(flat_spheres, x, 0.0), x)


# ============================================================================
# Stencils
# ============================================================================

@pytest.mark.unit
class TestStencils:
    """Laplacian and flow-derivative calibration on round spheres."""

    def test_default_step_scales_with_curvature(self, sphere_probe):
        assert sphere_probe.default_step == pytest.approx(1e-3)

    @pytest.mark.parametrize("point,expected", [
        ((0.3, 0.4, 0.0), 1e-3),     # r = 0.5, H = 4: clamped below
        ((6.0, 8.0, 0.0), 5e-3),     # r = 10, H = 0.2
        ((30.0, 40.0, 0.0), 1e-2),   # r = 50, H = 0.04: clamped above
    ])
    def test_default_step_clamped(self, flat_spheres, point, expected):
        probe = LevelSetProbe(flat_spheres, ChartPoint(point))
        assert probe.default_step == pytest.approx(expected)

    def test_ambient_laplacian_identity(self, flat_spheres, sphere_point):
        sample = field_sample(flat_spheres, sphere_point, X_COORDINATE)
        assert sample.surface_laplacian == pytest.approx(-2.0 * 1.2 / 4.0, rel=1e-6)

    def test_geodesic_laplacian(self, flat_spheres, sphere_point):
        sample = field_sample(flat_spheres, sphere_point, X_COORDINATE)
        assert sample.geodesic_laplacian == pytest.approx(-2.0 * 1.2 / 4.0, rel=1e-5)

    def test_tangential_gradient_norm(self, flat_spheres, sphere_point):
        sample = field_sample(flat_spheres, sphere_point, X_COORDINATE)
        # |∇_Σ x|^2 = 1 - (x/r)^2
        assert float(sample.tangential_gradient @ sample.tangential_gradient) == pytest.approx(
            1.0 - 0.36, rel=1e-6)

    def test_flow_derivative_of_mean_curvature(self, sphere_probe):
        # H = 2/r and r decreases along ∇f/|∇f|^2: d/dt H = 2/r^3
        assert sphere_probe.ambient().flow_derivative(MEAN_CURVATURE) == pytest.approx(0.25, rel=1e-5)

    def test_trajectory_matches_stencil(self, flat_spheres, sphere_point):
        along = trajectory_flow_derivative(flat_spheres, sphere_point, MEAN_CURVATURE)
        assert along == pytest.approx(0.25, rel=1e-5)

    def test_stencils_are_cached_per_step(self, sphere_probe):
        assert sphere_probe.ambient() is sphere_probe.ambient(sphere_probe.default_step)
        assert sphere_probe.surface(2e-3) is not sphere_probe.surface()


# ============================================================================
# Sub-normal chart
# ============================================================================

@pytest.mark.unit
class TestSubnormalChart:
    """Tests for the chart adapted to the level set and the flow."""

    def test_needs_principal_directions(self, flat_spheres, sphere_point):
        with pytest.raises(EigenvectorDegenerateError):
            subnormal_chart(flat_spheres, sphere_point, 1e-2)

    def test_metric_at_origin(self, cigarxr):
        chart = subnormal_chart(cigarxr, ChartPoint((1.0, 0.0, 0.0)), 1e-2)
        metric = chart.metric_at(chart.origin, 1e-4)
        assert np.allclose(metric, np.diag([0.5, 1.0, 1.0]), atol=1e-6)

    def test_origin_maps_to_base_point(self, cigarxr):
        chart = subnormal_chart(cigarxr, ChartPoint((1.0, 0.0, 0.0)), 1e-2)
        assert np.allclose(chart.position(chart.origin), [1.0, 0.0, 0.0], atol=1e-14)

    def test_extent_enforced(self, cigarxr):
        chart = subnormal_chart(cigarxr, ChartPoint((1.0, 0.0, 0.0)), 1e-2)
        level = chart.origin[0]
        with pytest.raises(ChartExtentError):
            chart.position((level, 0.5, 0.0))
