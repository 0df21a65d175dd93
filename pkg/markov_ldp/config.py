"""Configuration management for the Markov LDP toolkit."""

from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Toolkit settings loaded from ``LDP_``-prefixed environment variables."""

    # Application
    api_title: str = "Markov LDP Toolkit"
    api_version: str = "1.0.0"
    environment: str = "development"
    log_level: str = "INFO"
    log_dir: Optional[str] = None

    # Enumeration
    budget: int = 10**8
    workers: int = 1
    prefix_length: Optional[int] = None

    # Tolerances
    stationary_tol: float = 1e-12
    row_tol: float = 1e-12
    eigen_tol: float = 1e-10
    compare_rtol: float = 1e-12
    compare_atol: float = 1e-14
    bound_slack: float = 1e-9

    # Variational / constrained solvers
    solver_tol: float = 1e-10
    solver_max_iter: int = 100000

    # Combinatorics
    exact_factorial_limit: int = 20

    # Monitoring & Logging
    log_runs: bool = True

    class Config:
        env_prefix = "LDP_"
        env_file = ".env"
        case_sensitive = False


settings = Settings()
