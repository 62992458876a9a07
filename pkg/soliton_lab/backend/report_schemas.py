"""
Report Schemas
==============

Pydantic models for the JSON reports written by the command-line front
end. Non-finite reals are stored as null.
"""

from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field

REPORT_FORMAT = "soliton-lab-report/1"

Component = Union[float, List[float], List[List[float]]]


class ResidualRecord(BaseModel):
    """One identity at one point (and one σ)."""

    identity: str = Field(description="Identity id, e.g. 'H_evolution' or 'lemma1_c'")
    model: str = Field(description="Model name")
    point: List[float] = Field(description="Chart coordinates of the point")
    point_index: int = Field(default=-1, description="Index of the point in the sampled set")
    sigma: Optional[float] = Field(default=None, description="σ for σ-dependent identities")
    lhs: Optional[Component] = Field(default=None, description="Left side (scalar or component array)")
    rhs: Optional[Component] = Field(default=None, description="Right side, same shape as lhs")
    abs_residual: Optional[float] = Field(default=None, ge=0.0, description="max |lhs - rhs|")
    rel_residual: Optional[float] = Field(default=None, ge=0.0, description="Scaled residual")
    fd_step: Optional[float] = Field(default=None, description="Finite-difference step, when used")
    order_estimate: Optional[float] = Field(
        default=None,
        description="log2 of the residual ratio under step halving; null at the noise floor"
    )
    status: str = Field(description="'pass', 'fail', or the reason the point was skipped")
    tolerance: float = Field(description="Pass threshold on rel_residual")
    details: Dict[str, Optional[float]] = Field(
        default_factory=dict,
        description="Sub-residuals and alternative readings, reported only"
    )

    class Config:
        json_schema_extra = {
            "example": {
                "identity": "flow_equation",
                "model": "cigarxr",
                "point": [1.0, 0.0, 0.0],
                "point_index": 0,
                "sigma": None,
                "lhs": 1.0,
                "rhs": 1.0,
                "abs_residual": 0.0,
                "rel_residual": 0.0,
                "fd_step": None,
                "order_estimate": None,
                "status": "pass",
                "tolerance": 1e-8,
                "details": {},
            }
        }


class DecayRecord(BaseModel):
    """Power-law fit of one quantity along a ray."""

    quantity: str = Field(description="Quantity id, e.g. 'R' or 'U_sigma(2)'")
    model: str = Field(description="Model name")
    r_min: float = Field(description="Smallest sampled radius")
    r_max: float = Field(description="Largest sampled radius")
    n: int = Field(ge=0, description="Number of samples")
    exponent: Optional[float] = Field(default=None, description="Fitted log-log slope")
    constant: Optional[float] = Field(default=None, description="Fitted prefactor")
    r2: Optional[float] = Field(default=None, description="Coefficient of determination")
    residual_spread: Optional[float] = Field(default=None, description="max |log residual|")
    slope_drift: Optional[float] = Field(default=None, description="Slope change between range halves")
    verdict: str = Field(description="'power law', 'not power law' or 'degenerate quantity'")
    predicted_exponent: Optional[float] = Field(default=None, description="Upper bound from (a, b)")
    consistent: Optional[bool] = Field(default=None, description="exponent <= predicted + slack")
    reason: str = Field(default="", description="Why no fit was produced")


class ExponentRecord(BaseModel):
    """Exponent calculus for one (a, b) pair."""

    a: float = Field(description="Upper decay exponent of R")
    b: float = Field(description="Lower decay exponent of R")
    sigma: float = Field(description="Selected σ = 8a/b - 6")
    e1: float = Field(description="6a - 8a^2/b")
    e2: float = Field(description="2b - 4a")
    effective: float = Field(description="min(e1, e2)")
    asymptotically_round: bool = Field(description="True iff b < 2a")
    order_I: float = Field(description="r-exponent of term group I")
    order_II: float = Field(description="r-exponent of term group II")
    order_III: float = Field(description="r-exponent of term group III")


class ReportEnvelope(BaseModel):
    """Everything a command writes: header, summary and records."""

    format_version: Literal["soliton-lab-report/1"] = Field(
        default=REPORT_FORMAT,
        description="Report format version"
    )
    command: str = Field(description="Command that produced the report")
    config: Dict[str, str] = Field(description="Effective configuration, sorted")
    summary: Dict[str, Dict[str, int]] = Field(
        default_factory=dict,
        description="Counts per identity: pass, fail, skipped, error"
    )
    reports: List[ResidualRecord] = Field(default_factory=list, description="Identity rows")
    fits: List[DecayRecord] = Field(default_factory=list, description="Decay fits")
    exponents: List[ExponentRecord] = Field(default_factory=list, description="Exponent table")
