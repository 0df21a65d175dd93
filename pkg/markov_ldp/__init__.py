"""Markov LDP - method-of-types large deviations for finite-state Markov chains."""

__version__ = "1.0.0"
__author__ = "Markov LDP Team"
