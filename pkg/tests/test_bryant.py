"""
Tests for the Bryant Profile
============================

Reduced ODE, integration, conservation of R + |∇f|^2 and the chart model.
The integrated profile is shared through the session fixture in conftest.
"""

import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from soliton_lab.backend.bryant import (
    BryantProfile,
    bryant_integrate,
    check_reduced_system,
    state_derivatives,
    tip_seed,
)
from soliton_lab.backend.chart_geometry import ChartPoint
from soliton_lab.backend.decay_analysis import TheoremParams, measure_decay
from soliton_lab.backend.lab_exceptions import ChartSingularError, OutOfRangeError, PreconditionError
from soliton_lab.backend.level_set_geometry import frame_at
from soliton_lab.backend.surface_calculus import LevelSetProbe
from soliton_lab.backend.verification.evolution_identities import (
    EVOLUTION_TOLERANCE,
    verify_A2_evolution,
    verify_H_evolution,
)
from soliton_lab.backend.verification.soliton_identities import (
    verify_flow_equation,
    verify_lemma1,
    verify_soliton_equation,
)


@pytest.mark.unit
class TestReducedSystem:
    """Tests that need no integration."""

    def test_curvature_oracle_agrees(self):
        assert check_reduced_system(seed=1, samples=3) < 1e-10

    def test_tip_seed_normalization(self):
        p, d, f, w = tip_seed(1e-4)
        R = float(state_derivatives(p, d, f, w)["R"])
        assert R + w * w == pytest.approx(1.0, abs=1e-7)
        assert p == pytest.approx(1e-4, rel=1e-8)

    def test_invalid_radius(self):
        with pytest.raises(PreconditionError, match="r_max"):
            bryant_integrate(-1.0, 1e-10)

    def test_invalid_tolerance(self):
        with pytest.raises(PreconditionError, match="tolerance"):
            bryant_integrate(10.0, 0.0)


@pytest.mark.slow
class TestBryantProfile:
    """Tests on the integrated profile."""

    def test_hamilton_drift(self, bryant_profile):
        assert bryant_profile.hamilton_drift() < 1e-8

    def test_hamilton_constant_is_one(self, bryant_profile):
        assert bryant_profile.hamilton_constant == pytest.approx(1.0, abs=1e-6)

    def test_ode_residual_at_grid_points(self, bryant_profile):
        assert bryant_profile.ode_residual() < 1e-9

    def test_interpolation_residual_is_reported(self, bryant_profile):
        between = bryant_profile.interpolation_residual()
        assert bryant_profile.ode_residual() <= between < 1e-6

    def test_tolerance_halving(self):
        coarse = bryant_integrate(100.0, 1e-8).scalar_curvature_at(100.0)
        fine = bryant_integrate(100.0, 5e-9).scalar_curvature_at(100.0)
        assert abs(coarse - fine) < 1e-8

    def test_profile_shape(self, bryant_profile):
        assert np.all(np.diff(bryant_profile.r) > 0)
        assert np.all(bryant_profile.phi > 0)
        assert np.all(bryant_profile.dphi > 0)
        assert np.all(bryant_profile.w <= 0)

    def test_state_outside_grid(self, bryant_profile):
        with pytest.raises(OutOfRangeError):
            bryant_profile.state_at(2 * bryant_profile.r_max)

    def test_dict_round_trip_preserves_curvature(self, bryant_profile):
        restored = BryantProfile.from_dict(bryant_profile.to_dict())
        assert restored.scalar_curvature_at(50.0) == pytest.approx(
            bryant_profile.scalar_curvature_at(50.0), rel=1e-14)

    def test_unknown_format_rejected(self, bryant_profile):
        data = bryant_profile.to_dict()
        data["format"] = "other/9"
        with pytest.raises(ValueError, match="Unknown profile format"):
            BryantProfile.from_dict(data)


@pytest.mark.slow
class TestBryantModel:
    """Tests on the (r, theta, phi) chart model."""

    def test_scalar_curvature_exponent(self, bryant):
        fit = measure_decay(bryant, "R", (1e2, 1e4), 32, params=TheoremParams(1.0, 1.0))
        assert fit.is_power_law
        assert fit.exponent == pytest.approx(-1.0, abs=0.05)
        assert fit.consistent

    def test_theta_at_large_radius(self, bryant):
        frame = frame_at(bryant, bryant.ray_point(1e3))
        assert frame.theta == pytest.approx(1.0 / bryant.hamilton_constant, rel=0.02)

    @pytest.mark.parametrize("verify", [verify_H_evolution, verify_A2_evolution])
    def test_evolution_at_radius_ten(self, bryant, verify):
        probe = LevelSetProbe(bryant, ChartPoint((10.0, 1.1, 0.4)))
        report = verify(bryant, probe.point, probe=probe)
        assert report.rel_residual < EVOLUTION_TOLERANCE, report

    @pytest.mark.parametrize("r", [1.0, 10.0, 100.0])
    def test_level_sets_are_round(self, bryant, r):
        frame = frame_at(bryant, ChartPoint((r, 1.1, 0.4)))
        assert frame.S2 < 1e-10
        assert frame.umbilical

    def test_soliton_equation(self, bryant):
        report = verify_soliton_equation(bryant, ChartPoint((5.0, 1.0, 0.0)))
        assert report.passed, report

    @pytest.mark.parametrize("part", ["a", "b", "c", "d", "e"])
    def test_soliton_identities(self, bryant, part):
        assert verify_lemma1(bryant, ChartPoint((20.0, 1.3, 2.0)), part).passed

    def test_flow_equation(self, bryant):
        assert verify_flow_equation(bryant, ChartPoint((3.0, 0.9, 0.0))).passed

    def test_chart_singular_at_pole(self, bryant):
        with pytest.raises(ChartSingularError):
            bryant.metric_jet(ChartPoint((1.0, 0.0, 0.0)), 2)

    def test_chart_singular_near_tip(self, bryant):
        with pytest.raises(ChartSingularError):
            bryant.metric_jet(ChartPoint((1e-5, 1.0, 0.0)), 2)
