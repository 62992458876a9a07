"""
Bryant Profile Caching Module
=============================

Persistent cache for integrated Bryant profiles, so repeated CLI runs and
test sessions do not re-integrate the ODE. Uses SQLite for storage.

A profile is identified by what its integration depended on: the outer
radius, the integrator tolerance, the tip radius of the series seed and
the profile format. Those four are stored as columns next to the JSON
body, so a request for a shorter profile at the same tolerance and seed
can be served by a longer one already on disk.

Profiles are stored as JSON; Python's float repr round-trips doubles
exactly, so a cached profile is bit-identical to a fresh one.
"""

import hashlib
import json
import logging
import os
import sqlite3
from dataclasses import dataclass
from datetime import datetime
from threading import Lock
from typing import Any, Dict, List, Optional

from .bryant import PROFILE_FORMAT, TIP_RADIUS, BryantProfile, bryant_integrate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProfileKey:
    """Integration parameters that determine a Bryant profile."""

    r_max: float
    tolerance: float
    r0: float = TIP_RADIUS
    profile_format: str = PROFILE_FORMAT

    @classmethod
    def for_profile(cls, profile: BryantProfile, r_max: float) -> "ProfileKey":
        return cls(float(r_max), float(profile.tolerance), float(profile.r0))

    @property
    def digest(self) -> str:
        key_parts = [
            f"r_max={self.r_max!r}",
            f"tol={self.tolerance!r}",
            f"r0={self.r0!r}",
            f"format={self.profile_format}",
        ]
        return hashlib.sha256("|".join(key_parts).encode("utf-8")).hexdigest()

    def describe(self) -> str:
        return f"r_max={self.r_max:g}, tol={self.tolerance:g}, r0={self.r0:g}"


class ProfileCache:
    """
    Persistent cache of Bryant profiles using SQLite.

    Rows are keyed by ProfileKey.digest; r_max, tolerance, r0 and format
    are kept as columns for range lookups.
    """

    def __init__(self, cache_dir: str = ".cache", enabled: bool = True):
        """
        Initialize the cache.

        Args:
            cache_dir: Directory to store cache database
            enabled: Whether caching is enabled
        """
        self.cache_dir = cache_dir
        self.enabled = enabled
        self._lock = Lock()

        if self.enabled:
            os.makedirs(self.cache_dir, exist_ok=True)
            self._init_db()

    @property
    def db_path(self) -> str:
        return os.path.join(self.cache_dir, "bryant_profiles.db")

    def _init_db(self):
        with sqlite3.connect(self.db_path) as conn:
            conn.execute("""
                CREATE TABLE IF NOT EXISTS profiles (
                    cache_key TEXT PRIMARY KEY,
                    r_max REAL NOT NULL,
                    tolerance REAL NOT NULL,
                    r0 REAL NOT NULL,
                    profile_format TEXT NOT NULL,
                    steps INTEGER NOT NULL,
                    hamilton_constant REAL NOT NULL,
                    profile_json TEXT NOT NULL,
                    created_at TEXT NOT NULL,
                    access_count INTEGER DEFAULT 1
                )
            """)
            conn.execute("""
                CREATE INDEX IF NOT EXISTS profiles_by_seed
                ON profiles (tolerance, r0, profile_format, r_max)
            """)
            conn.commit()

        logger.info(f"Profile cache initialized at {self.db_path}")

    def _load(self, conn: sqlite3.Connection, row: sqlite3.Row) -> BryantProfile:
        conn.execute(
            "UPDATE profiles SET access_count = access_count + 1 WHERE cache_key = ?",
            (row["cache_key"],),
        )
        conn.commit()
        return BryantProfile.from_dict(json.loads(row["profile_json"]))

    def get(self, key: ProfileKey) -> Optional[BryantProfile]:
        """
        Profile stored under exactly this key.

        Returns:
            BryantProfile or None if not found (or unreadable)
        """
        if not self.enabled:
            return None

        with self._lock:
            try:
                with sqlite3.connect(self.db_path) as conn:
                    conn.row_factory = sqlite3.Row
                    row = conn.execute(
                        "SELECT cache_key, profile_json FROM profiles WHERE cache_key = ?",
                        (key.digest,),
                    ).fetchone()
                    if not row:
                        logger.debug(f"Cache MISS for {key.describe()}")
                        return None
                    logger.info(f"Cache HIT for {key.describe()}")
                    return self._load(conn, row)
            except Exception as e:
                logger.error(f"Error reading from profile cache: {e}")
                return None

    def covering(self, key: ProfileKey) -> Optional[BryantProfile]:
        """
        Shortest stored profile reaching at least key.r_max with the same
        tolerance, tip radius and format.
        """
        if not self.enabled:
            return None

        with self._lock:
            try:
                with sqlite3.connect(self.db_path) as conn:
                    conn.row_factory = sqlite3.Row
                    row = conn.execute("""
                        SELECT cache_key, r_max, profile_json FROM profiles
                        WHERE tolerance = ? AND r0 = ? AND profile_format = ? AND r_max >= ?
                        ORDER BY r_max ASC LIMIT 1
                    """, (key.tolerance, key.r0, key.profile_format, key.r_max)).fetchone()
                    if not row:
                        logger.debug(f"No stored profile covers {key.describe()}")
                        return None
                    logger.info(f"Cache HIT for {key.describe()} from a profile to r_max={row['r_max']:g}")
                    return self._load(conn, row)
            except Exception as e:
                logger.error(f"Error reading from profile cache: {e}")
                return None

    def put(self, profile: BryantProfile, r_max: float):
        """Store a profile under the r_max it was requested with."""
        if not self.enabled:
            return

        key = ProfileKey.for_profile(profile, r_max)

        with self._lock:
            try:
                with sqlite3.connect(self.db_path) as conn:
                    conn.execute("""
                        INSERT OR REPLACE INTO profiles
                        (cache_key, r_max, tolerance, r0, profile_format, steps,
                         hamilton_constant, profile_json, created_at)
                        VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
                    """, (
                        key.digest,
                        key.r_max,
                        key.tolerance,
                        key.r0,
                        key.profile_format,
                        int(profile.r.size),
                        float(profile.hamilton_constant),
                        json.dumps(profile.to_dict()),
                        datetime.now().isoformat(),
                    ))
                    conn.commit()
                logger.debug(f"Cached profile for {key.describe()}")
            except Exception as e:
                logger.error(f"Error writing to profile cache: {e}")

    def keys(self) -> List[ProfileKey]:
        """Stored keys, by tolerance then r_max."""
        if not self.enabled:
            return []

        with self._lock:
            with sqlite3.connect(self.db_path) as conn:
                rows = conn.execute(
                    "SELECT r_max, tolerance, r0, profile_format FROM profiles ORDER BY tolerance, r_max"
                ).fetchall()
        return [ProfileKey(*row) for row in rows]

    def clear(self):
        """Clear all cached profiles."""
        if not self.enabled:
            return

        with self._lock:
            try:
                with sqlite3.connect(self.db_path) as conn:
                    conn.execute("DELETE FROM profiles")
                    conn.commit()
                logger.info("Profile cache cleared")
            except Exception as e:
                logger.error(f"Error clearing profile cache: {e}")

    def get_stats(self) -> Dict[str, Any]:
        """Get cache statistics."""
        if not self.enabled:
            return {"enabled": False, "total_entries": 0, "total_size_bytes": 0}

        with self._lock:
            try:
                with sqlite3.connect(self.db_path) as conn:
                    conn.row_factory = sqlite3.Row
                    row = conn.execute("""
                        SELECT COUNT(*) AS count, SUM(access_count) AS accesses,
                               SUM(steps) AS steps, MAX(r_max) AS r_max
                        FROM profiles
                    """).fetchone()
                    return {
                        "enabled": True,
                        "total_entries": row["count"],
                        "total_accesses": row["accesses"] or 0,
                        "total_steps": row["steps"] or 0,
                        "largest_r_max": row["r_max"],
                        "total_size_bytes": os.path.getsize(self.db_path),
                        "db_path": self.db_path,
                    }
            except Exception as e:
                logger.error(f"Error getting profile cache stats: {e}")
                return {"enabled": True, "error": str(e)}


def cached_bryant_profile(
    r_max: float,
    tolerance: float,
    cache: Optional[ProfileCache] = None,
    allow_longer: bool = False,
) -> BryantProfile:
    """
    Return a cached profile, integrating and storing it on a miss.

    With allow_longer a stored profile to a larger radius (same tolerance
    and seed) is accepted; its grid then extends past r_max.
    """
    key = ProfileKey(float(r_max), float(tolerance))
    if cache is not None:
        profile = cache.covering(key) if allow_longer else cache.get(key)
        if profile is not None:
            return profile
    profile = bryant_integrate(r_max, tolerance)
    if cache is not None:
        cache.put(profile, r_max)
    return profile
