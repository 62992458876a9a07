"""
Decay Analysis Module
=====================

Asymptotic decay of level-set quantities along radial rays and the
exponent calculus that turns curvature decay bounds

    c1 r^-b <= R <= c2 r^-a,   0 < a <= 1,  b >= a

into a bound on the umbilical ratio:

1. σ selection, σ = 8a/b - 6
2. Exponents of U_0: e1 = 6a - 8a^2/b, e2 = 2b - 4a (round when b < 2a)
3. Orders of the three term groups I, II, III of the reversed-time inequality
4. The comparison ODE u' = -u + C sqrt(u) and its closed form
5. Log-log power-law fits of sampled quantities
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import linregress

from .chart_geometry import ChartPoint
from .lab_exceptions import DomainError, IntegrationFailureError, LabError, PreconditionError
from .level_set_geometry import L22_FIELD, WEIGHT, GeometricField, LevelSetConfig, frame_at
from .soliton_models import SolitonModel, radial_distance
from .surface_calculus import LevelSetProbe

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 8
SLOPE_DRIFT_LIMIT = 0.25
MIN_R_SQUARED = 0.95
CONSISTENCY_SLACK = 0.05

POWER_LAW = "power law"
NOT_POWER_LAW = "not power law"
DEGENERATE = DomainError.status

DECAY_QUANTITIES = ("R", "L22_mag", "grad_lambda_norm", "hess_lambda_norm", "U_sigma", "H", "grad_norm_sq")

# Ray ranges that stay inside each model's usable chart
DEFAULT_DECAY_RANGES: Dict[str, Tuple[float, float]] = {
    "bryant": (1e2, 1e4),
    "cigar": (0.5, 6.0),
    "cigarxr": (0.5, 6.0),
}


# ============================================================================
# Exponent calculus
# ============================================================================

@dataclass(frozen=True)
class TheoremParams:
    """Curvature decay bounds c1 r^-b <= R <= c2 r^-a."""

    a: float
    b: float
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.a <= 1.0:
            raise PreconditionError(f"a must lie in (0, 1], got {self.a}")
        if self.b < self.a:
            raise PreconditionError(f"b must be >= a, got a={self.a}, b={self.b}")
        if self.c1 <= 0 or self.c2 <= 0:
            raise PreconditionError(f"c1 and c2 must be positive, got {self.c1}, {self.c2}")


def sigma_select(params: TheoremParams) -> float:
    return 8.0 * params.a / params.b - 6.0


@dataclass(frozen=True)
class MainExponents:
    e1: float
    e2: float
    effective: float
    asymptotically_round: bool


def main_exponents(params: TheoremParams) -> MainExponents:
    """U_0 in O(r^e1) ∩ O(r^e2); round iff b < 2a."""
    a, b = params.a, params.b
    e1 = 6.0 * a - 8.0 * a * a / b
    e2 = 2.0 * b - 4.0 * a
    from_sigma = -a * sigma_select(params)
    if abs(e1 - from_sigma) > 1e-12 * max(1.0, abs(e1)):
        logger.warning(f"e1 = {e1} disagrees with -a*sigma = {from_sigma} for a={a}, b={b}")
    return MainExponents(e1, e2, min(e1, e2), b < 2.0 * a)


@dataclass(frozen=True)
class TermOrders:
    order_I: float
    order_II: float
    order_III: float


def term_orders(params: TheoremParams, sigma: Optional[float] = None) -> TermOrders:
    """r-exponents of the term groups; order_III vanishes for the selected σ."""
    if sigma is None:
        sigma = sigma_select(params)
    a, b = params.a, params.b
    return TermOrders(
        order_I=(2.0 + sigma) * b / 2.0 - 3.0 * a,
        order_II=(6.0 + sigma) * b / 2.0 - 4.0 * a,
        order_III=(6.0 + sigma) * b / 2.0 - 4.0 * a,
    )


@dataclass(frozen=True)
class ExponentRow:
    a: float
    b: float
    sigma: float
    e1: float
    e2: float
    effective: float
    asymptotically_round: bool
    order_I: float
    order_II: float
    order_III: float


def exponent_table(a_values: Sequence[float], b_values: Sequence[float]) -> List[ExponentRow]:
    """One row per valid (a, b) pair; invalid pairs are logged and left out."""
    rows = []
    for a in a_values:
        for b in b_values:
            try:
                params = TheoremParams(a, b)
            except PreconditionError as e:
                logger.warning(f"Skipping exponent row: {e}")
                continue
            sigma = sigma_select(params)
            exps = main_exponents(params)
            orders = term_orders(params, sigma)
            rows.append(ExponentRow(a, b, sigma, exps.e1, exps.e2, exps.effective,
                                    exps.asymptotically_round, orders.order_I, orders.order_II,
                                    orders.order_III))
    return rows


# ============================================================================
# Comparison ODE
# ============================================================================

@dataclass(frozen=True)
class ComparisonSolution:
    """
    u' = -u + C sqrt(u) from u(0) = u0. With v = sqrt(u) the equation is
    linear: v(τ) = C + (v0 - C) e^(-τ/2).
    """

    C: float
    u0: float

    @property
    def sup_bound(self) -> float:
        return max(self.u0, self.C ** 2)

    @property
    def limit(self) -> float:
        return self.C ** 2

    def evaluate(self, tau):
        v = self.C + (math.sqrt(self.u0) - self.C) * np.exp(-0.5 * np.asarray(tau, dtype=float))
        return v ** 2

    def __call__(self, tau):
        return self.evaluate(tau)

    def integrate(self, taus: Sequence[float], rtol: float = 1e-12) -> np.ndarray:
        """u on the given increasing τ grid from solve_ivp, without the substitution."""
        taus = np.asarray(taus, dtype=float)
        C = self.C

        def rhs(_tau: float, u: np.ndarray) -> np.ndarray:
            return -u + C * np.sqrt(np.maximum(u, 0.0))

        tau0, u_start = 0.0, self.u0
        if self.u0 == 0.0 and C > 0.0:
            # sqrt(u) is not Lipschitz at 0; start on the maximal branch u ≈ (Cτ/2)^2
            tau0 = 1e-6
            u_start = (0.5 * C * tau0) ** 2
        out = np.empty_like(taus)
        head = taus <= tau0
        out[head] = self.evaluate(taus[head])
        tail = taus[~head]
        if tail.size == 0:
            return out
        sol = solve_ivp(rhs, (tau0, float(tail[-1])), [u_start], method="DOP853",
                        t_eval=tail, rtol=rtol, atol=1e-20)
        if not sol.success:
            raise IntegrationFailureError(float(sol.t[-1]) if sol.t.size else tau0, sol.message)
        out[~head] = sol.y[0]
        return out

    def integrator_gap(self, tau_max: float = 50.0, samples: int = 501) -> float:
        taus = np.linspace(0.0, tau_max, samples)
        return float(np.max(np.abs(self.integrate(taus) - self.evaluate(taus))))


def comparison_bound(C: float, u0: float) -> ComparisonSolution:
    if C < 0 or u0 < 0:
        raise PreconditionError(f"comparison ODE needs C >= 0 and u0 >= 0, got C={C}, u0={u0}")
    return ComparisonSolution(float(C), float(u0))


# ============================================================================
# Power-law fits
# ============================================================================

@dataclass
class DecayFit:
    """Log-log fit value ≈ constant * r^exponent over [r_min, r_max]."""

    quantity: str
    model: str
    r_min: float
    r_max: float
    n_samples: int
    exponent: float
    constant: float
    r_squared: float
    residual_spread: float  # max |log residual|
    slope_drift: float  # |slope(upper half) - slope(lower half)|
    verdict: str
    predicted_exponent: Optional[float] = None
    consistent: Optional[bool] = None
    reason: str = ""
    samples: List[Tuple[float, float]] = field(default_factory=list, repr=False)

    @property
    def is_power_law(self) -> bool:
        return self.verdict == POWER_LAW

    @classmethod
    def degenerate(cls, quantity: str, model: str, r_min: float, r_max: float,
                   n_samples: int, reason: str) -> "DecayFit":
        nan = float("nan")
        return cls(quantity, model, r_min, r_max, n_samples, nan, nan, nan, nan, nan,
                   DEGENERATE, reason=reason)


def _slope(log_r: np.ndarray, log_v: np.ndarray) -> float:
    return float(linregress(log_r, log_v).slope)


def fit_power_law(samples: Sequence[Tuple[float, float]], quantity: str = "custom",
                  model: str = "") -> DecayFit:
    """
    Least squares on (log r, log value).

    Raises:
        PreconditionError: fewer than 8 samples or r not strictly increasing
        DomainError: a nonpositive value or radius
    """
    if len(samples) < MIN_FIT_SAMPLES:
        raise PreconditionError(f"power-law fit needs >= {MIN_FIT_SAMPLES} samples, got {len(samples)}")
    r = np.array([s[0] for s in samples], dtype=float)
    v = np.array([s[1] for s in samples], dtype=float)
    for ri, vi in zip(r, v):
        if not (ri > 0 and vi > 0 and math.isfinite(vi)):
            raise DomainError(float(ri), float(vi))
    if np.any(np.diff(r) <= 0):
        raise PreconditionError("power-law fit needs strictly increasing radii")

    log_r, log_v = np.log(r), np.log(v)
    fit = linregress(log_r, log_v)
    residuals = log_v - (fit.intercept + fit.slope * log_r)
    half = len(r) // 2
    drift = abs(_slope(log_r[half:], log_v[half:]) - _slope(log_r[:half + 1], log_v[:half + 1]))
    r_squared = float(fit.rvalue ** 2)
    verdict = POWER_LAW if drift <= SLOPE_DRIFT_LIMIT and r_squared >= MIN_R_SQUARED else NOT_POWER_LAW

    return DecayFit(
        quantity=quantity,
        model=model,
        r_min=float(r[0]),
        r_max=float(r[-1]),
        n_samples=len(r),
        exponent=float(fit.slope),
        constant=float(math.exp(fit.intercept)),
        r_squared=r_squared,
        residual_spread=float(np.max(np.abs(residuals))),
        slope_drift=float(drift),
        verdict=verdict,
        samples=list(zip(r.tolist(), v.tolist())),
    )


# ============================================================================
# Sampling along rays
# ============================================================================

def _scalar_curvature(model: SolitonModel, p: ChartPoint) -> float:
    return float(model.geometry(p, 2, potential_order=0).scalar.value)


def _frame_quantity(getter: Callable) -> Callable[[SolitonModel, ChartPoint], float]:
    return lambda model, p: float(getter(frame_at(model, p)))


def _l22_magnitude(model: SolitonModel, p: ChartPoint) -> float:
    return abs(L22_FIELD.evaluate(frame_at(model, p, with_gradients=True)))


def _grad_lambda_norm(model: SolitonModel, p: ChartPoint) -> float:
    return float(np.linalg.norm(LevelSetProbe(model, p).ambient().frame_gradient(WEIGHT)))


def _hess_lambda_norm(model: SolitonModel, p: ChartPoint) -> float:
    return float(np.linalg.norm(LevelSetProbe(model, p).ambient().frame_hessian(WEIGHT)))


def quantity_evaluator(quantity: str, sigma: float = 0.0) -> Callable[[SolitonModel, ChartPoint], float]:
    if quantity == "R":
        return _scalar_curvature
    if quantity == "H":
        return _frame_quantity(lambda frame: frame.H)
    if quantity == "grad_norm_sq":
        return _frame_quantity(lambda frame: frame.grad_norm_sq)
    if quantity == "U_sigma":
        field_ = GeometricField.u_sigma(sigma)

        def u_sigma(model: SolitonModel, p: ChartPoint) -> float:
            frame = frame_at(model, p)
            frame.require_principal("U_sigma decay")
            return field_.evaluate(frame)
        return u_sigma
    if quantity == "L22_mag":
        return _l22_magnitude
    if quantity == "grad_lambda_norm":
        return _grad_lambda_norm
    if quantity == "hess_lambda_norm":
        return _hess_lambda_norm
    raise PreconditionError(f"Unknown decay quantity '{quantity}'; valid: {', '.join(DECAY_QUANTITIES)}")


def predicted_exponent(quantity: str, params: TheoremParams) -> Optional[float]:
    """Upper-bound exponent implied by the decay hypotheses; None when none is claimed."""
    a, b = params.a, params.b
    return {
        "R": -a,
        "L22_mag": -3.0 * a,
        "grad_lambda_norm": 2.0 * b - 1.5 * a,
        "hess_lambda_norm": 3.0 * b - 3.0 * a,
        "U_sigma": 0.0,
        "grad_norm_sq": 0.0,
    }.get(quantity)


def ray_radii(r_range: Tuple[float, float], n_samples: int) -> np.ndarray:
    r_min, r_max = r_range
    if not 0 < r_min < r_max:
        raise PreconditionError(f"radius range must satisfy 0 < r_min < r_max, got {r_range}")
    if n_samples < MIN_FIT_SAMPLES:
        raise PreconditionError(f"need >= {MIN_FIT_SAMPLES} samples, got {n_samples}")
    return np.geomspace(r_min, r_max, n_samples)


def measure_decay(
    model: SolitonModel,
    quantity: str,
    r_range: Optional[Tuple[float, float]] = None,
    n_samples: int = 32,
    sigma: float = 0.0,
    params: Optional[TheoremParams] = None,
) -> DecayFit:
    """
    Sample a quantity at geometrically spaced radii along the model's ray
    and fit a power law. Points where the quantity is undefined give a
    "degenerate quantity" fit instead of an exception.
    """
    if r_range is None:
        r_range = DEFAULT_DECAY_RANGES.get(model.name, (1.0, 10.0))
    radii = ray_radii(r_range, n_samples)
    evaluate = quantity_evaluator(quantity, sigma)
    name = f"U_sigma({sigma:g})" if quantity == "U_sigma" else quantity
    logger.info(f"Measuring decay of {name} on {model.name} over r in [{radii[0]:g}, {radii[-1]:g}]")

    samples = []
    try:
        for r in radii:
            p = model.ray_point(float(r))
            samples.append((radial_distance(model, p), evaluate(model, p)))
        fit = fit_power_law(samples, name, model.name)
    except LabError as e:
        logger.warning(f"Decay of {name} on {model.name} not measurable: {e.status} ({e})")
        return DecayFit.degenerate(name, model.name, float(radii[0]), float(radii[-1]), len(radii), str(e))

    if params is not None:
        fit.predicted_exponent = predicted_exponent(quantity, params)
        if fit.predicted_exponent is not None and fit.is_power_law:
            fit.consistent = fit.exponent <= fit.predicted_exponent + CONSISTENCY_SLACK
    logger.info(f"  exponent {fit.exponent:.4f}, constant {fit.constant:.4g}, "
                f"R^2 {fit.r_squared:.4f}, verdict '{fit.verdict}'")
    return fit


def measure_comparison_constant(model: SolitonModel, sigma: float, radii: Sequence[float],
                                config: Optional[LevelSetConfig] = None) -> float:
    """
    sup over the ray of |III|, the coefficient of sqrt(U_σ) in the
    reversed-time equation (L22 and weight-Hessian terms over λ|∇f|^2 - 1).
    Points where it is undefined are skipped.
    """
    from .verification.umbilical_identities import prop3_sides

    values = []
    for r in radii:
        p = model.ray_point(float(r))
        try:
            probe = LevelSetProbe(model, p, config)
            sides = prop3_sides(probe, probe.default_step, sigma)
        except LabError as e:
            logger.debug(f"Comparison constant: skipping r={r:g} on {model.name}: {e.status}")
            continue
        frame = probe.frame
        q = frame.require_lambda() * frame.grad_norm_sq
        root_U = math.sqrt(frame.umbilical_ratio(sigma))
        values.append(abs((sides.terms["L22"] + sides.terms["weight_hessian"]) / (root_U * (q - 1.0))))
    if not values:
        raise PreconditionError(f"No radius on {model.name} admits the comparison constant")
    C = max(values)
    logger.info(f"Comparison constant on {model.name} (σ={sigma:g}): {C:.4g} from {len(values)} radii")
    return C
