"""File formats and request/response models for the Markov LDP toolkit."""

import math
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

# +inf / -inf are written as strings so every output stays valid JSON
ExtendedFloat = Union[float, Literal["inf", "-inf"]]


def ext(value: float) -> ExtendedFloat:
    """Map infinities to their string form, leave finite floats untouched."""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


# ============== File Models ==============

class ModelFile(BaseModel):
    """Stationary (s+1)-tuple distribution of an s-step Markov chain."""

    n: int = Field(..., ge=1, description="Alphabet size")
    s: int = Field(..., ge=1, description="Memory length")
    mu: List[float] = Field(..., description="n^(s+1) probabilities in lexicographic tuple order")

    @model_validator(mode="after")
    def check_length(self):
        if len(self.mu) != self.n ** (self.s + 1):
            raise ValueError(f"mu must have n^(s+1) = {self.n ** (self.s + 1)} entries, got {len(self.mu)}")
        return self

    class Config:
        json_schema_extra = {
            "example": {"n": 2, "s": 1, "mu": [0.4, 0.2, 0.2, 0.2]}
        }


class BallEvent(BaseModel):
    """Closed l1-ball {nu : ||nu - center||_1 <= radius}."""

    kind: Literal["ball"] = "ball"
    center: List[float] = Field(..., description="Center, n^(s+1) entries")
    radius: float = Field(..., ge=0, description="l1 radius")


class HalfSpaceEvent(BaseModel):
    """Half-space {nu : <c, nu> >= b}."""

    kind: Literal["halfspace"] = "halfspace"
    c: List[float] = Field(..., description="Normal vector, n^(s+1) entries")
    b: float = Field(..., description="Threshold")


class ClassListEvent(BaseModel):
    """Explicit finite list of type classes given by their integer counts."""

    kind: Literal["classes"] = "classes"
    counts: List[List[int]] = Field(..., description="Count vectors of the member classes")


EventSpec = Annotated[Union[BallEvent, HalfSpaceEvent, ClassListEvent], Field(discriminator="kind")]


class CensusEntry(BaseModel):
    """One type class: exact counts and the number of paths producing them."""

    counts: List[int] = Field(..., description="Integer k-tuple counts summing to l")
    cardinality: int = Field(..., ge=1, description="|T(zeta, l, s+1)|")


class CensusFile(BaseModel):
    """Census of E(l, n, s+1) as written by ``types census``."""

    n: int = Field(..., ge=1, description="Alphabet size")
    l: int = Field(..., ge=1, description="Path length")
    s: int = Field(..., ge=1, description="Memory length")
    entries: List[CensusEntry] = Field(..., min_length=1, description="Classes sorted lexicographically by counts")

    class Config:
        json_schema_extra = {
            "example": {
                "n": 2,
                "l": 2,
                "s": 1,
                "entries": [
                    {"counts": [0, 0, 0, 2], "cardinality": 1},
                    {"counts": [0, 1, 1, 0], "cardinality": 2},
                    {"counts": [2, 0, 0, 0], "cardinality": 1},
                ],
            }
        }


# ============== Request Models ==============

class CensusRequest(BaseModel):
    """Exact census of E(l, n, s+1)."""

    n: int = Field(..., ge=1, le=16, description="Alphabet size")
    l: int = Field(..., ge=1, description="Path length")
    s: int = Field(1, ge=1, description="Memory length")
    workers: Optional[int] = Field(None, ge=1, description="Worker processes")

    class Config:
        json_schema_extra = {"example": {"n": 2, "l": 6, "s": 1}}


class RateRequest(BaseModel):
    """Rate functions of a candidate empirical measure under a model."""

    model: ModelFile
    nu: List[float] = Field(..., description="Candidate distribution on A^(s+1)")

    class Config:
        json_schema_extra = {
            "example": {
                "model": {"n": 2, "s": 1, "mu": [0.4, 0.2, 0.2, 0.2]},
                "nu": [0.25, 0.25, 0.25, 0.25],
            }
        }


class ContractionRequest(BaseModel):
    """Singleton-frequency rate J(phi) under a one-step model."""

    model: ModelFile
    phi: List[float] = Field(..., description="Singleton frequencies")

    class Config:
        json_schema_extra = {
            "example": {
                "model": {"n": 2, "s": 1, "mu": [0.4, 0.2, 0.2, 0.2]},
                "phi": [0.2, 0.8],
            }
        }


SAMPLING_COMMANDS = {("simulate", None), ("verify", "smb")}


class RunConfig(BaseModel):
    """Resolved settings of one CLI invocation."""

    subcommand: str = Field(..., description="Top-level subcommand")
    action: Optional[str] = Field(None, description="Second-level action (types/verify)")
    model_path: Optional[str] = Field(None, description="Model JSON file")
    seed: Optional[int] = Field(None, ge=0, lt=2**64, description="64-bit RNG seed")
    budget: int = Field(..., gt=0, description="Max path-steps for enumeration")
    workers: int = Field(1, ge=1, description="Census worker processes")
    output_path: Optional[str] = Field(None, description="Output file; stdout when omitted")
    tolerance_overrides: Dict[str, float] = Field(default_factory=dict)
    options: Dict[str, Any] = Field(default_factory=dict, description="Subcommand arguments")

    @model_validator(mode="after")
    def seed_for_sampling(self):
        sampling = (self.subcommand, self.action) in SAMPLING_COMMANDS or bool(self.options.get("random"))
        if sampling and self.seed is None:
            command = " ".join(part for part in (self.subcommand, self.action) if part)
            raise ValueError(f"--seed is required for '{command}'")
        return self

    @field_validator("tolerance_overrides")
    @classmethod
    def positive_tolerances(cls, value: Dict[str, float]) -> Dict[str, float]:
        for key, tol in value.items():
            if not tol > 0:
                raise ValueError(f"tolerance {key} must be positive")
        return value


# ============== Response Models ==============

class EstimateResponse(BaseModel):
    """Cyclic empirical measure of one path."""

    l: int = Field(description="Path length")
    s: int = Field(description="Memory length")
    counts: List[int] = Field(description="(s+1)-tuple counts in lexicographic order")


class EntropyResponse(BaseModel):
    """Process entropy of a model, evaluated two ways."""

    n: int
    s: int
    entropy_mu: float = Field(description="H(mu)")
    entropy_mu_bar: float = Field(description="H(mu_bar)")
    process_entropy: float = Field(description="H(mu) - H(mu_bar)")
    row_form: float = Field(description="sum_i mu_bar_i H(row_i)")


class RateResponse(BaseModel):
    """Conditional relative entropy and its equivalent forms."""

    stationary: bool
    max_violation: float
    conditional_relative_entropy: ExtendedFloat = Field(description="D(nu||mu) - D(nu_bar||mu_bar)")
    row_form: ExtendedFloat = Field(description="sum_i nu_bar_i sum_j c_ij log(c_ij / a_ij)")
    theta_rate: ExtendedFloat = Field(description="+inf off the stationary set")


class ContractionResponse(BaseModel):
    """Variational, constrained and row-form singleton rates."""

    value_variational: ExtendedFloat
    value_constrained: ExtendedFloat
    value_row_form: ExtendedFloat
    u_star: List[float]
    nu_star: List[float]
    residual_variational: ExtendedFloat
    residual_constrained: ExtendedFloat
    residual_row_form: ExtendedFloat


class BoundsRow(BaseModel):
    """Type-class bounds for one census entry, all in log space."""

    counts: List[int]
    cardinality: int
    conditional_entropy: float
    log_lower: float = Field(description="-n^(s+1) log(2l) + l H_c")
    log_cardinality: float
    log_upper: float = Field(description="log l + l H_c")
    perm_log_lower: float
    perm_log_upper: float
    passed: bool


class BoundsResponse(BaseModel):
    """All bound checks over a census."""

    n: int
    l: int
    s: int
    status: Literal["PASS", "FAIL", "UNVERIFIED"]
    failures: int
    mass_conserved: bool = Field(True, description="Cardinalities sum to n^l")
    total_probability: Optional[float] = Field(None, description="Sum of class probabilities under the model")
    rate_failures: Optional[int] = Field(None, description="Classes outside the rate envelope")
    rows: List[BoundsRow]


class SandwichResponse(BaseModel):
    """Likelihood sandwich over a batch of paths."""

    l: int
    checked: int
    failures: int
    worst_lower_gap: float = Field(description="min(exact - lower); negative means a violation")
    worst_upper_gap: float = Field(description="min(upper - exact); negative means a violation")
    status: Literal["PASS", "FAIL", "UNVERIFIED"]


class SMBResponse(BaseModel):
    """Per-symbol negative log-likelihood over seeded paths."""

    l: int
    paths: int
    mean: float
    std: float
    process_entropy: float
    bias: float = Field(description="mean - process_entropy")
    status: Literal["PASS", "FAIL"]


class RateRow(BaseModel):
    """One line of the ``verify ldp`` CSV."""

    l: int
    exact: ExtendedFloat
    rate_proxy: ExtendedFloat
    envelope: float
    passed: bool


class ErrorResponse(BaseModel):
    """Machine-readable failure."""

    error: str = Field(description="Exception class")
    message: str = Field(description="Human-readable message")


class HealthResponse(BaseModel):
    """System health status."""

    status: str = Field(description="Overall system status (healthy/unhealthy)")
    service: Optional[str] = Field(None, description="Service name")
    version: Optional[str] = Field(None, description="Service version")
