"""Type-class census endpoints."""

from fastapi import APIRouter

from markov_ldp.core.types_method import census_bounds_check, enumerate_census
from markov_ldp.schemas.converters import bounds_response, census_file, census_from_file
from markov_ldp.schemas.models import BoundsResponse, CensusFile, CensusRequest
from markov_ldp.utils.logger import RunLogger

router = APIRouter(prefix="/api/types", tags=["types"])


@router.post("/census", response_model=CensusFile)
def census(request: CensusRequest) -> CensusFile:
    """
    Exact census of E(l, n, s+1).

    Refused with 413 when n^l * l exceeds the configured path-step budget.
    """
    RunLogger.log_command("api types census", request.model_dump())
    return census_file(enumerate_census(request.l, request.n, request.s, workers=request.workers))


@router.post("/verify", response_model=BoundsResponse)
def verify(request: CensusFile) -> BoundsResponse:
    """
    Check every class of a census against the type-class bounds.

    Status is UNVERIFIED when l < n, FAIL when any class or the total
    path count is off.
    """
    RunLogger.log_command("api types verify", {"n": request.n, "l": request.l, "s": request.s})
    return bounds_response(census_bounds_check(census_from_file(request)))
