"""
Bryant Soliton Module
=====================

The rotationally symmetric steady soliton g = dr^2 + phi(r)^2 g_{S^2},
built by integrating the reduced ODE system from a series seed at the tip.

Reduced system (state p = phi, d = 1 - phi', f, w = f'):
    phi'' = A = d(2 - d)/p + w(1 - d)      spherical component
    w'    = 2A/p                           radial component
Before integrating, ``check_reduced_system`` evaluates Ric + Hess f on
synthetic warped-product jets through chart_geometry and confirms both
reduced components.

Normalization: R(O) = C0 = 1, f(O) = 0.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly

from .chart_geometry import ChartPoint, CurvatureJets, MetricJet, ScalarJet
from .lab_exceptions import (
    ChartSingularError,
    IntegrationFailureError,
    OutOfRangeError,
    PreconditionError,
)
from .model_jets import radial_function_terms, warped_metric_terms
from .soliton_models import Region, SolitonModel

logger = logging.getLogger(__name__)

PROFILE_FORMAT = "bryant-profile/1"
TIP_RADIUS = 1e-4

# Series coefficients of phi = r - r^3/36 + A5 r^5 at the tip (R(O) = 1)
_A3 = 1.0 / 36.0
_A5 = 29.0 / 21600.0


@dataclass
class BryantChartConfig:
    """Cut-offs of the (r, theta, phi) chart."""

    radial_cutoff: float = 1e-3  # r below this is chart-singular
    pole_cutoff: float = 1e-6  # sin(theta) below this is chart-singular


# ============================================================================
# Reduced ODE
# ============================================================================

def tip_seed(r0: float) -> np.ndarray:
    """State (p, d, f, w) at r0 from the smooth series at the tip."""
    p = r0 - _A3 * r0 ** 3 + _A5 * r0 ** 5
    d = 3.0 * _A3 * r0 ** 2 - 5.0 * _A5 * r0 ** 4
    f = -r0 ** 2 / 6.0 + r0 ** 4 / 270.0
    w = -r0 / 3.0 + 2.0 * r0 ** 3 / 135.0
    return np.array([p, d, f, w])


def state_derivatives(p, d, f, w) -> Dict[str, np.ndarray]:
    """
    Radial derivatives of the state, algebraic in (p, d, w).

    Returns a dict with q = phi', A = phi'', A1 = phi''', A2 = phi'''',
    w1 = f'', w2 = f''', w3 = f'''' and the scalar curvature R.
    Works elementwise on arrays.
    """
    q = 1.0 - d
    sph = d * (2.0 - d)  # 1 - phi'^2
    A = sph / p + w * q
    w1 = 2.0 * A / p
    A1 = w * A - q * sph / p ** 2
    A2 = w1 * A + w * A1 - A * (1.0 - 3.0 * q * q) / p ** 2 + 2.0 * q * q * sph / p ** 3
    w2 = 2.0 * (A1 / p - A * q / p ** 2)
    w3 = 2.0 * (A2 / p - 2.0 * A1 * q / p ** 2 - A * A / p ** 2 + 2.0 * A * q * q / p ** 3)
    R = 2.0 * sph / p ** 2 - 4.0 * A / p
    return {"q": q, "A": A, "A1": A1, "A2": A2, "w1": w1, "w2": w2, "w3": w3, "R": R}


def bryant_rhs(r: float, y: np.ndarray) -> np.ndarray:
    p, d, f, w = y
    A = d * (2.0 - d) / p + w * (1.0 - d)
    return np.array([1.0 - d, -A, w, 2.0 * A / p])


def warp_derivatives(p: float, q: float, A: float, A1: float, A2: float) -> List[float]:
    """Derivatives of P = phi^2 up to order 4."""
    return [
        p * p,
        2.0 * p * q,
        2.0 * (q * q + p * A),
        2.0 * (3.0 * q * A + p * A1),
        2.0 * (3.0 * A * A + 4.0 * q * A1 + p * A2),
    ]


def warped_product_jet(
    r: float,
    theta: float,
    phi_derivatives: Tuple[float, float, float],
    f_derivatives: Tuple[float, float, float],
) -> Tuple[MetricJet, ScalarJet]:
    """Order-2 jets of dr^2 + phi^2 g_{S^2} and f(r) from prescribed values."""
    phi, dphi, ddphi = phi_derivatives
    P = [phi * phi, 2.0 * phi * dphi, 2.0 * (dphi * dphi + phi * ddphi)]
    point = ChartPoint((r, theta, 0.0))
    metric = MetricJet.from_terms(warped_metric_terms(theta, P, 2), point)
    potential = ScalarJet.from_terms(radial_function_terms(f_derivatives, 2), point)
    return metric, potential


def check_reduced_system(seed: int = 0, samples: int = 4) -> float:
    """
    Compare Ric + Hess f on synthetic warped-product jets with the reduced
    radial and spherical expressions.

    Returns:
        Largest relative discrepancy over the samples
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        phi, dphi, ddphi = rng.uniform(0.5, 2.0), rng.uniform(0.1, 1.0), rng.uniform(-1.0, 1.0)
        df, ddf = rng.uniform(-1.0, 0.0), rng.uniform(-1.0, 1.0)
        theta = rng.uniform(0.5, 2.5)
        metric, potential = warped_product_jet(1.0, theta, (phi, dphi, ddphi), (0.0, df, ddf))
        geometry = CurvatureJets(metric, potential)
        tensor = geometry.ricci.value + geometry.hessian_f.value
        radial = -2.0 * ddphi / phi + ddf
        spherical = -ddphi / phi + (1.0 - dphi * dphi) / phi ** 2 + df * dphi / phi
        scale = max(1.0, abs(radial), abs(spherical))
        worst = max(
            worst,
            abs(tensor[0, 0] - radial) / scale,
            abs(tensor[1, 1] / (phi * phi) - spherical) / scale,
            abs(tensor[2, 2] / (phi * phi * np.sin(theta) ** 2) - spherical) / scale,
            float(np.abs(tensor - np.diag(np.diag(tensor))).max()) / scale,
        )
    return worst


# ============================================================================
# Profile
# ============================================================================

@dataclass
class BryantProfile:
    """Integrated Bryant profile on an increasing radial grid."""

    r: np.ndarray
    phi: np.ndarray
    d: np.ndarray  # 1 - phi'
    f: np.ndarray
    w: np.ndarray  # f'
    tolerance: float
    r0: float = TIP_RADIUS
    interpolation_order: int = 7
    hamilton_constant: float = 1.0
    _interpolants: Dict[str, BPoly] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("r", "phi", "d", "f", "w"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        self._build_interpolants()

    @property
    def r_min(self) -> float:
        return float(self.r[0])

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def dphi(self) -> np.ndarray:
        return 1.0 - self.d

    def derivatives(self) -> Dict[str, np.ndarray]:
        return state_derivatives(self.phi, self.d, self.f, self.w)

    def _build_interpolants(self) -> None:
        der = self.derivatives()
        stacks = {
            "phi": [self.phi, der["q"], der["A"], der["A1"]],
            "d": [self.d, -der["A"], -der["A1"], -der["A2"]],
            "f": [self.f, self.w, der["w1"], der["w2"]],
            "w": [self.w, der["w1"], der["w2"], der["w3"]],
        }
        for name, columns in stacks.items():
            self._interpolants[name] = BPoly.from_derivatives(self.r, np.column_stack(columns))

    def state_at(self, r: float) -> np.ndarray:
        """Interpolated (p, d, f, w) at r."""
        if not self.r_min <= r <= self.r_max:
            raise OutOfRangeError(r, self.r_min, self.r_max)
        return np.array([float(self._interpolants[k](r)) for k in ("phi", "d", "f", "w")])

    def radial_jets(self, r: float) -> Tuple[List[float], List[float]]:
        """Derivatives of P = phi^2 and of f at r, up to order 4."""
        p, d, f, w = self.state_at(r)
        der = state_derivatives(p, d, f, w)
        P = warp_derivatives(p, der["q"], der["A"], der["A1"], der["A2"])
        F = [f, w, der["w1"], der["w2"], der["w3"]]
        return [float(v) for v in P], [float(v) for v in F]

    def scalar_curvature_at(self, r: float) -> float:
        p, d, f, w = self.state_at(r)
        return float(state_derivatives(p, d, f, w)["R"])

    def scalar_curvature(self) -> np.ndarray:
        return self.derivatives()["R"]

    def hamilton_drift(self) -> float:
        """max |R + |grad f|^2 - C0| over the grid."""
        check = self.scalar_curvature() + self.w ** 2
        return float(np.abs(check - self.hamilton_constant).max())

    def _slope_mismatch(self, radii: np.ndarray) -> float:
        states = np.array([self._interpolants[k](radii) for k in ("phi", "d", "f", "w")])
        slopes = np.array([self._interpolants[k].derivative()(radii) for k in ("phi", "d", "f", "w")])
        rhs = bryant_rhs(0.0, states)
        scale = np.maximum(np.abs(rhs), 1.0)
        return float((np.abs(slopes - rhs) / scale).max())

    def ode_residual(self) -> float:
        """Largest relative mismatch between the interpolant's derivatives and the ODE, at grid nodes."""
        return self._slope_mismatch(self.r)

    def interpolation_residual(self) -> float:
        """
        The same mismatch at interval midpoints, where the Hermite
        interpolant is furthest from the integrated solution.
        """
        return self._slope_mismatch(0.5 * (self.r[1:] + self.r[:-1]))

    def to_rows(self) -> List[Tuple[float, ...]]:
        """Rows (r, phi, dphi, f, df, R, C0_check)."""
        R = self.scalar_curvature()
        check = R + self.w ** 2
        return list(zip(self.r, self.phi, self.dphi, self.f, self.w, R, check))

    def to_dict(self) -> dict:
        return {
            "format": PROFILE_FORMAT,
            "r": self.r.tolist(),
            "phi": self.phi.tolist(),
            "d": self.d.tolist(),
            "f": self.f.tolist(),
            "w": self.w.tolist(),
            "tolerance": self.tolerance,
            "r0": self.r0,
            "hamilton_constant": self.hamilton_constant,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BryantProfile":
        if data.get("format") != PROFILE_FORMAT:
            raise ValueError(f"Unknown profile format {data.get('format')!r}")
        return cls(
            r=data["r"], phi=data["phi"], d=data["d"], f=data["f"], w=data["w"],
            tolerance=data["tolerance"], r0=data["r0"],
            hamilton_constant=data["hamilton_constant"],
        )


def _phi_positive(r: float, y: np.ndarray) -> float:
    return y[0]


_phi_positive.terminal = True
_phi_positive.direction = -1


def bryant_integrate(r_max: float, tolerance: float, r0: float = TIP_RADIUS) -> BryantProfile:
    """
    Integrate the Bryant profile from the tip seed to r_max.

    Args:
        r_max: outer radius (> r0)
        tolerance: relative local error bound of the integrator

    Returns:
        BryantProfile on the integrator's accepted steps

    Raises:
        PreconditionError: invalid r_max / tolerance
        IntegrationFailureError: oracle mismatch, phi leaving the positive cone
            or integrator failure
    """
    if not r_max > r0:
        raise PreconditionError(f"r_max must exceed the tip radius {r0}, got {r_max}")
    if not tolerance > 0:
        raise PreconditionError(f"tolerance must be positive, got {tolerance}")

    logger.info("=" * 60)
    logger.info("BRYANT PROFILE INTEGRATION")
    logger.info("=" * 60)

    mismatch = check_reduced_system()
    if mismatch > 1e-10:
        raise IntegrationFailureError(r0, f"reduced system disagrees with curvature oracle ({mismatch:.2e})")
    logger.debug(f"Reduced system confirmed by curvature oracle (mismatch {mismatch:.2e})")

    # The state components keep one sign after the tip, so pure relative control is safe
    sol = solve_ivp(
        bryant_rhs,
        (r0, r_max),
        tip_seed(r0),
        method="DOP853",
        rtol=tolerance,
        atol=tolerance * 1e-12,
        events=_phi_positive,
    )
    if sol.status == 1 or sol.status == -1:
        last = float(sol.t[-1]) if sol.t.size else r0
        reason = "phi left the positive cone" if sol.status == 1 else sol.message
        logger.error(f"Bryant integration failed at r = {last:.6g}: {reason}")
        raise IntegrationFailureError(last, reason)

    seed_R = float(state_derivatives(*sol.y[:, 0])["R"])
    profile = BryantProfile(
        r=sol.t, phi=sol.y[0], d=sol.y[1], f=sol.y[2], w=sol.y[3],
        tolerance=tolerance, r0=r0,
        hamilton_constant=seed_R + float(sol.y[3, 0]) ** 2,
    )
    logger.info(
        f"Integrated {profile.r.size} steps to r = {profile.r_max:.6g}; "
        f"C0 = {profile.hamilton_constant:.12f}, drift = {profile.hamilton_drift():.3e}"
    )
    return profile


# ============================================================================
# Model
# ============================================================================

def _bryant_sampler(rng: np.random.Generator, count: int, region: Region) -> List[ChartPoint]:
    lo, hi = region
    r = rng.uniform(lo, hi, size=count)
    theta = rng.uniform(0.3, np.pi - 0.3, size=count)
    azimuth = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return [ChartPoint((a, b, c)) for a, b, c in zip(r, theta, azimuth)]


def bryant_model(profile: BryantProfile, config: Optional[BryantChartConfig] = None) -> SolitonModel:
    """Bryant soliton in the chart (r, theta, phi); jets from the ODE right-hand side."""
    if config is None:
        config = BryantChartConfig()

    def check(p: ChartPoint) -> Tuple[float, float]:
        r, theta = p.coords[0], p.coords[1]
        if r < config.radial_cutoff:
            raise ChartSingularError(p.coords, f"r below radial cutoff {config.radial_cutoff}")
        if abs(np.sin(theta)) < config.pole_cutoff:
            raise ChartSingularError(p.coords, "pole of the sphere chart")
        if r > profile.r_max:
            raise OutOfRangeError(r, profile.r_min, profile.r_max)
        return r, theta

    def metric(p: ChartPoint, order: int) -> MetricJet:
        r, theta = check(p)
        P, _ = profile.radial_jets(r)
        return MetricJet.from_terms(warped_metric_terms(theta, P, order), p)

    def potential(p: ChartPoint, order: int) -> ScalarJet:
        r, _ = check(p)
        _, F = profile.radial_jets(r)
        return ScalarJet.from_terms(radial_function_terms(F, order), p)

    return SolitonModel(
        name="bryant",
        dimension=3,
        soliton_constant=0.0,
        hamilton_constant=profile.hamilton_constant,
        metric_provider=metric,
        potential_provider=potential,
        critical_set="tip r = 0",
        exact=False,
        default_region=(1.0, 100.0),
        sampler=_bryant_sampler,
        radial_distance_fn=lambda p: float(p.coords[0]),
        ray_point_fn=lambda r: ChartPoint((float(r), 0.5 * np.pi, 0.0)),
    )
