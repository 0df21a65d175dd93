"""Singleton-frequency rate endpoint."""

from fastapi import APIRouter

from markov_ldp.core.contraction import contract
from markov_ldp.core.markov_core import KTupleDistribution, model_from_file_data
from markov_ldp.schemas.converters import contraction_response
from markov_ldp.schemas.models import ContractionRequest, ContractionResponse
from markov_ldp.utils.logger import RunLogger

router = APIRouter(prefix="/api", tags=["contraction"])


@router.post("/contract", response_model=ContractionResponse)
async def singleton_rate(request: ContractionRequest) -> ContractionResponse:
    """
    Rate function J(phi) of the singleton frequencies of a one-step chain.

    The variational, row-form and constrained values are computed by
    independent solvers and returned side by side.
    """
    RunLogger.log_command("api contract", {"n": request.model.n})
    model = model_from_file_data(request.model)
    phi = KTupleDistribution(model.n, 1, request.phi)
    return contraction_response(contract(phi, model))
