"""API module initialization."""

from markov_ldp.api.analysis import router as analysis_router
from markov_ldp.api.contraction import router as contraction_router
from markov_ldp.api.census import router as census_router

__all__ = ["analysis_router", "contraction_router", "census_router"]
