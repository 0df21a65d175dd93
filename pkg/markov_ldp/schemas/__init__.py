"""Schemas module initialization."""

from markov_ldp.schemas.models import (
    BallEvent,
    BoundsResponse,
    BoundsRow,
    CensusEntry,
    CensusRequest,
    ClassListEvent,
    ContractionRequest,
    ContractionResponse,
    EntropyResponse,
    ErrorResponse,
    EstimateResponse,
    EventSpec,
    HalfSpaceEvent,
    HealthResponse,
    ModelFile,
    RateRequest,
    RateResponse,
    RateRow,
    RunConfig,
    SandwichResponse,
    SMBResponse,
    CensusFile,
)

__all__ = [
    "BallEvent",
    "BoundsResponse",
    "BoundsRow",
    "CensusEntry",
    "CensusRequest",
    "ClassListEvent",
    "ContractionRequest",
    "ContractionResponse",
    "EntropyResponse",
    "ErrorResponse",
    "EstimateResponse",
    "EventSpec",
    "HalfSpaceEvent",
    "HealthResponse",
    "ModelFile",
    "RateRequest",
    "RateResponse",
    "RateRow",
    "RunConfig",
    "SandwichResponse",
    "SMBResponse",
    "CensusFile",
]
