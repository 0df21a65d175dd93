"""Entropy and rate-function endpoints."""

from fastapi import APIRouter

from markov_ldp.core.markov_core import model_from_file_data
from markov_ldp.schemas.converters import entropy_response, rate_response
from markov_ldp.schemas.models import EntropyResponse, ModelFile, RateRequest, RateResponse
from markov_ldp.utils.logger import RunLogger

router = APIRouter(prefix="/api", tags=["analysis"])


@router.post("/entropy", response_model=EntropyResponse)
async def model_entropy(request: ModelFile) -> EntropyResponse:
    """
    Process entropy of a stationary model.

    Returns H(mu), H(mu_bar), their difference and the row form
    sum_i mu_bar_i H(row_i). Non-stationary models are rejected with 400.
    """
    RunLogger.log_command("api entropy", {"n": request.n, "s": request.s})
    return entropy_response(model_from_file_data(request))


@router.post("/rate", response_model=RateResponse)
async def rate(request: RateRequest) -> RateResponse:
    """
    Conditional relative entropy D_c(nu || mu).

    Off the stationary set the doublet-estimator rate is +inf, serialized
    as the string "inf".
    """
    RunLogger.log_command("api rate", {"n": request.model.n, "s": request.model.s})
    return rate_response(model_from_file_data(request.model), request.nu)
