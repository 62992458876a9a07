"""
Unit Tests for Soliton Models
=============================

Closed-form models: the cigar, cigar x R and the flat fixtures.
"""

import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from soliton_lab.backend.chart_geometry import ChartPoint, scalar_curvature
from soliton_lab.backend.lab_exceptions import (
    InsufficientJetOrderError,
    PreconditionError,
    UnsupportedModelError,
)
from soliton_lab.backend.soliton_models import euclidean_model, radial_distance
from soliton_lab.backend.verification.soliton_identities import verify_lemma1, verify_soliton_equation
from soliton_lab.backend.verification.suite import IdentitySuite, run_suite


@pytest.mark.unit
class TestCigar:
    """Tests for Hamilton's cigar."""

    @pytest.mark.parametrize("rho", [0.0, 0.5, 1.0, 3.0])
    def test_scalar_curvature_profile(self, cigar, rho):
        R = scalar_curvature(cigar.metric_jet(ChartPoint((rho, 0.0)), 2))
        assert R == pytest.approx(4.0 / (1.0 + rho * rho), rel=1e-12)

    def test_hamilton_constant(self, cigar):
        p = ChartPoint((0.8, -1.1))
        geometry = cigar.geometry(p, 2, potential_order=1)
        total = float(geometry.scalar.value) + float(geometry.grad_f_norm_sq.value)
        assert total == pytest.approx(cigar.hamilton_constant, rel=1e-12)

    def test_soliton_equation_passes(self, cigar):
        report = verify_soliton_equation(cigar, ChartPoint((0.4, 0.9)))
        assert report.passed
        assert report.rel_residual < 1e-10

    def test_radial_distance_along_ray(self, cigar):
        p = cigar.ray_point(1.5)
        assert radial_distance(cigar, p) == pytest.approx(1.5, rel=1e-14)

    def test_jet_order_capped(self, cigar):
        with pytest.raises(InsufficientJetOrderError):
            cigar.metric_jet(ChartPoint((0.1, 0.1)), 5)

    def test_wrong_dimension_rejected(self, cigar):
        with pytest.raises(ValueError, match="dimension"):
            cigar.metric_jet(ChartPoint((0.1, 0.1, 0.1)), 2)


@pytest.mark.unit
class TestCigarCrossLine:
    """Tests for cigar x R."""

    def test_matches_cigar_block(self, cigar, cigarxr):
        planar = scalar_curvature(cigar.metric_jet(ChartPoint((0.7, 0.2)), 2))
        product = scalar_curvature(cigarxr.metric_jet(ChartPoint((0.7, 0.2, 5.0)), 2))
        assert product == pytest.approx(planar, rel=1e-13)

    @pytest.mark.parametrize("part", ["a", "b", "c", "d", "e"])
    def test_soliton_identities(self, cigarxr, part):
        report = verify_lemma1(cigarxr, ChartPoint((0.9, -0.4, 0.3)), part)
        assert report.passed, report

    def test_sampler_is_deterministic(self, cigarxr):
        first = cigarxr.sample_points(np.random.default_rng(3), 5)
        second = cigarxr.sample_points(np.random.default_rng(3), 5)
        assert [p.coords for p in first] == [p.coords for p in second]

    def test_sampler_respects_region(self, cigarxr):
        points = cigarxr.sample_points(np.random.default_rng(0), 50, (0.5, 1.0))
        rho = [np.hypot(p.coords[0], p.coords[1]) for p in points]
        assert min(rho) >= 0.5 and max(rho) <= 1.0
        assert all(-1.0 <= p.coords[2] <= 1.0 for p in points)


@pytest.mark.unit
class TestFlatFixtures:
    """Tests for the flat models."""

    def test_euclidean_dimension_checked(self):
        with pytest.raises(PreconditionError):
            euclidean_model(4)

    def test_euclidean_has_no_ray(self, euclidean):
        with pytest.raises(UnsupportedModelError):
            euclidean.ray_point(1.0)

    def test_euclidean_has_no_radial_distance(self, euclidean):
        with pytest.raises(UnsupportedModelError):
            radial_distance(euclidean, ChartPoint((0.0, 0.0, 0.0)))

    def test_flat_spheres_not_a_soliton(self, flat_spheres):
        assert not flat_spheres.is_soliton
        with pytest.raises(UnsupportedModelError):
            verify_lemma1(flat_spheres, ChartPoint((1.0, 0.0, 0.0)), "d")

    def test_unknown_part_rejected(self, cigar):
        with pytest.raises(PreconditionError, match="Unknown lemma1 part"):
            verify_lemma1(cigar, ChartPoint((0.1, 0.2)), "z")


@pytest.mark.integration
class TestSeededSolitonEquation:
    """Ric + Hess f = 0 at 100 seeded points of each closed-form model."""

    @pytest.mark.parametrize("name", ["cigar", "cigarxr"])
    def test_hundred_points(self, request, name):
        model = request.getfixturevalue(name)
        reports = run_suite([model], IdentitySuite(identities=["soliton"], points=100, seed=0))
        assert len(reports) == 100
        assert max(r.abs_residual for r in reports) < 1e-10
        assert all(r.passed for r in reports)
