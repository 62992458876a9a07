"""
Shared fixtures: model instances and one Bryant profile per session.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from soliton_lab.backend.bryant import bryant_integrate, bryant_model
from soliton_lab.backend.soliton_models import (
    cigar_cross_line_model,
    cigar_model,
    euclidean_model,
    flat_spheres_model,
)


@pytest.fixture(scope="session")
def cigar():
    return cigar_model()


@pytest.fixture(scope="session")
def cigarxr():
    return cigar_cross_line_model()


@pytest.fixture(scope="session")
def euclidean():
    return euclidean_model(3)


@pytest.fixture(scope="session")
def flat_spheres():
    return flat_spheres_model()


@pytest.fixture(scope="session")
def bryant_profile():
    """Integrated once; the slow tests share it."""
    return bryant_integrate(1e4, 1e-10)


@pytest.fixture(scope="session")
def bryant(bryant_profile):
    return bryant_model(bryant_profile)
