"""Utility modules for the Markov LDP toolkit."""

from markov_ldp.utils.logger import logger, RunLogger

__all__ = ["logger", "RunLogger"]
