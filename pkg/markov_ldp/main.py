"""FastAPI application setup for the Markov LDP toolkit."""

from fastapi import FastAPI, Request, status
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from markov_ldp.api import analysis_router, census_router, contraction_router
from markov_ldp.config import settings
from markov_ldp.core.exceptions import BudgetExceededError, ConvergenceError, LDPError
from markov_ldp.schemas.models import ErrorResponse, HealthResponse
from markov_ldp.utils.logger import RunLogger, logger

# Create FastAPI app
app = FastAPI(
    title=settings.api_title,
    description="Method-of-types large deviations for finite-state Markov chains",
    version=settings.api_version,
    docs_url="/api/docs",
    openapi_url="/api/openapi.json",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# ============== Event Handlers ==============

@app.on_event("startup")
async def startup_event():
    """Log the active configuration."""
    logger.info(f"Starting {settings.api_title} v{settings.api_version}")
    logger.info(f"Environment: {settings.environment} | budget={settings.budget} | workers={settings.workers}")


@app.on_event("shutdown")
async def shutdown_event():
    logger.info(f"Shutting down {settings.api_title}")


# ============== Routes ==============

@app.get("/api/health", tags=["health"], response_model=HealthResponse)
async def health_check():
    """System health check endpoint."""
    return HealthResponse(status="healthy", service=settings.api_title, version=settings.api_version)


ERROR_RESPONSES = {
    400: {"model": ErrorResponse, "description": "Invalid input"},
    413: {"model": ErrorResponse, "description": "Census over the path-step budget"},
    422: {"model": ErrorResponse, "description": "Validation or solver failure"},
}

app.include_router(analysis_router, responses=ERROR_RESPONSES)
app.include_router(contraction_router, responses=ERROR_RESPONSES)
app.include_router(census_router, responses=ERROR_RESPONSES)


# ============== Error Handlers ==============

@app.exception_handler(LDPError)
async def ldp_exception_handler(request: Request, exc: LDPError):
    """Map toolkit errors to 4xx responses carrying the error JSON."""
    RunLogger.log_error(type(exc).__name__, exc.message, {"path": request.url.path})
    code = status.HTTP_400_BAD_REQUEST
    if isinstance(exc, BudgetExceededError):
        code = status.HTTP_413_REQUEST_ENTITY_TOO_LARGE
    elif isinstance(exc, ConvergenceError):
        code = status.HTTP_422_UNPROCESSABLE_ENTITY
    payload = exc.to_dict()
    payload.pop("best", None)
    return JSONResponse(status_code=code, content=payload)


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    """Handle request validation errors."""
    logger.warning(f"Validation error: {exc}")
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": "Invalid request data", "errors": jsonable_encoder(exc.errors())},
    )


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    """Handle uncaught exceptions."""
    logger.error(f"Unhandled exception: {str(exc)}", exc_info=True)
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={"detail": "Internal server error"},
    )


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "markov_ldp.main:app",
        host="0.0.0.0",
        port=8000,
        reload=settings.environment == "development",
        log_level=settings.log_level.lower(),
    )
