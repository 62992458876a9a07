"""
Tests for the Bryant Profile Cache
==================================

SQLite-backed storage keyed by (r_max, tolerance, r0, format).
"""

import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from soliton_lab.backend.bryant import PROFILE_FORMAT, TIP_RADIUS, bryant_integrate
from soliton_lab.backend.profile_cache import ProfileCache, ProfileKey, cached_bryant_profile


@pytest.fixture(scope="module")
def small_profile():
    return bryant_integrate(20.0, 1e-8)


@pytest.fixture
def cache(tmp_path):
    return ProfileCache(str(tmp_path / "cache"))


@pytest.mark.unit
class TestProfileKey:
    """Tests for the integration-parameter key."""

    def test_defaults(self):
        key = ProfileKey(20.0, 1e-8)
        assert key.r0 == TIP_RADIUS
        assert key.profile_format == PROFILE_FORMAT

    def test_digest_is_stable(self):
        assert ProfileKey(20.0, 1e-8).digest == ProfileKey(20.0, 1e-8).digest

    @pytest.mark.parametrize("other", [
        ProfileKey(21.0, 1e-8),
        ProfileKey(20.0, 1e-9),
        ProfileKey(20.0, 1e-8, r0=2 * TIP_RADIUS),
        ProfileKey(20.0, 1e-8, profile_format="other/9"),
    ])
    def test_every_parameter_changes_digest(self, other):
        assert ProfileKey(20.0, 1e-8).digest != other.digest

    def test_for_profile(self, small_profile):
        assert ProfileKey.for_profile(small_profile, 20.0) == ProfileKey(20.0, 1e-8)


@pytest.mark.unit
class TestProfileCache:
    """Tests for put/get/covering/clear."""

    def test_miss_on_empty_cache(self, cache):
        assert cache.get(ProfileKey(20.0, 1e-8)) is None

    def test_put_then_get(self, cache, small_profile):
        cache.put(small_profile, 20.0)
        restored = cache.get(ProfileKey(20.0, 1e-8))
        assert restored is not None
        assert np.array_equal(restored.r, small_profile.r)
        assert restored.hamilton_constant == small_profile.hamilton_constant

    def test_key_includes_tolerance(self, cache, small_profile):
        cache.put(small_profile, 20.0)
        assert cache.get(ProfileKey(20.0, 1e-10)) is None

    def test_keys_listed(self, cache, small_profile):
        cache.put(small_profile, 20.0)
        assert cache.keys() == [ProfileKey(20.0, 1e-8)]

    def test_covering_serves_shorter_request(self, cache, small_profile):
        cache.put(small_profile, 20.0)
        assert cache.get(ProfileKey(10.0, 1e-8)) is None
        longer = cache.covering(ProfileKey(10.0, 1e-8))
        assert longer is not None
        assert longer.r_max == pytest.approx(20.0)

    def test_covering_needs_same_tolerance_and_reach(self, cache, small_profile):
        cache.put(small_profile, 20.0)
        assert cache.covering(ProfileKey(10.0, 1e-9)) is None
        assert cache.covering(ProfileKey(30.0, 1e-8)) is None

    def test_stats_and_clear(self, cache, small_profile):
        cache.put(small_profile, 20.0)
        cache.get(ProfileKey(20.0, 1e-8))
        stats = cache.get_stats()
        assert stats["total_entries"] == 1
        assert stats["total_accesses"] == 2  # insert counts as the first access
        assert stats["total_steps"] == small_profile.r.size
        assert stats["largest_r_max"] == 20.0
        cache.clear()
        assert cache.get_stats()["total_entries"] == 0

    def test_disabled_cache(self, tmp_path, small_profile):
        cache = ProfileCache(str(tmp_path / "cache"), enabled=False)
        cache.put(small_profile, 20.0)
        assert cache.get(ProfileKey(20.0, 1e-8)) is None
        assert cache.covering(ProfileKey(20.0, 1e-8)) is None
        assert cache.keys() == []
        assert cache.get_stats() == {"enabled": False, "total_entries": 0, "total_size_bytes": 0}
        assert not (tmp_path / "cache").exists()


@pytest.mark.unit
class TestCachedProfile:
    """Tests for cached_bryant_profile."""

    def test_integrates_once(self, cache):
        first = cached_bryant_profile(15.0, 1e-8, cache)
        second = cached_bryant_profile(15.0, 1e-8, cache)
        assert np.array_equal(first.phi, second.phi)
        assert cache.get_stats()["total_accesses"] == 2

    def test_longer_profile_accepted_on_request(self, cache, small_profile):
        cache.put(small_profile, 20.0)
        profile = cached_bryant_profile(10.0, 1e-8, cache, allow_longer=True)
        assert np.array_equal(profile.r, small_profile.r)
        assert len(cache.keys()) == 1

    def test_exact_lookup_by_default(self, cache, small_profile):
        cache.put(small_profile, 20.0)
        profile = cached_bryant_profile(10.0, 1e-8, cache)
        assert profile.r_max == pytest.approx(10.0)
        assert len(cache.keys()) == 2
