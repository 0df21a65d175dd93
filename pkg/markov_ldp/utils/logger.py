"""Logging configuration for the Markov LDP toolkit."""

import logging
from datetime import datetime
from pathlib import Path

from markov_ldp.config import settings

log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

handlers = [logging.StreamHandler()]
if settings.log_dir:
    logs_dir = Path(settings.log_dir)
    logs_dir.mkdir(parents=True, exist_ok=True)
    log_file = logs_dir / f"markov_ldp_{datetime.now().strftime('%Y%m%d')}.log"
    handlers.append(logging.FileHandler(log_file))

logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format=log_format,
    handlers=handlers,
)

logger = logging.getLogger("markov_ldp")


class RunLogger:
    """Logs enumeration, verification and solver runs for later inspection."""

    @staticmethod
    def log_command(command: str, options: dict = None):
        """Log an incoming CLI or API command."""
        if settings.log_runs:
            opt_str = f" | {options}" if options else ""
            logger.info(f"COMMAND | {command}{opt_str}")

    @staticmethod
    def log_census(n: int, l: int, s: int, classes: int, workers: int, latency_ms: float):
        """Log a finished type-class census."""
        if settings.log_runs:
            logger.info(
                f"CENSUS | n={n} | l={l} | s={s} | CLASSES: {classes} | "
                f"WORKERS: {workers} | LATENCY: {latency_ms:.1f}ms"
            )

    @staticmethod
    def log_verification(name: str, checked: int, failures: int, status: str):
        """Log the outcome of a verification sweep."""
        line = f"VERIFY | {name} | CHECKED: {checked} | FAILURES: {failures} | STATUS: {status}"
        if failures:
            logger.warning(line)
        elif settings.log_runs:
            logger.info(line)

    @staticmethod
    def log_solver(name: str, iterations: int, residual: float, value: float):
        """Log convergence of an iterative solver."""
        if settings.log_runs:
            logger.info(
                f"SOLVER | {name} | ITER: {iterations} | RESIDUAL: {residual:.3e} | VALUE: {value:.12g}"
            )

    @staticmethod
    def log_error(error_type: str, message: str, context: dict = None):
        """Log errors with context for debugging."""
        ctx_str = f" | CONTEXT: {context}" if context else ""
        logger.error(f"ERROR | TYPE: {error_type} | MSG: {message}{ctx_str}")
