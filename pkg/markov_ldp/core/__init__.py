"""Numerical engine: Markov models, entropies, type classes, rates and contraction."""

from markov_ldp.core.contraction import (
    contract,
    donsker_varadhan_row_form,
    g_objective,
    handy_identity_check,
    singleton_rate_constrained,
    singleton_rate_variational,
)
from markov_ldp.core.empirical import EmpiricalMeasure, cyclic_empirical, follower_sets, reconstruct_paths
from markov_ldp.core.exceptions import (
    BudgetExceededError,
    ConvergenceError,
    DomainError,
    HypothesisError,
    LDPError,
    ReconstructionError,
    StationarityError,
)
from markov_ldp.core.information import conditional_relative_entropy, entropy, process_entropy, relative_entropy
from markov_ldp.core.ldp import EventSet, delta_exact, ldp_event_check, likelihood_sandwich, rate_doublet
from markov_ldp.core.markov_core import KTupleDistribution, MarkovModel, SamplePath, build_model, load_model
from markov_ldp.core.types_method import TypeCensus, census_bounds_check, enumerate_census, is_achievable

__all__ = [
    "BudgetExceededError",
    "ConvergenceError",
    "DomainError",
    "EmpiricalMeasure",
    "EventSet",
    "HypothesisError",
    "KTupleDistribution",
    "LDPError",
    "MarkovModel",
    "ReconstructionError",
    "SamplePath",
    "StationarityError",
    "TypeCensus",
    "build_model",
    "census_bounds_check",
    "conditional_relative_entropy",
    "contract",
    "cyclic_empirical",
    "delta_exact",
    "donsker_varadhan_row_form",
    "entropy",
    "enumerate_census",
    "follower_sets",
    "g_objective",
    "handy_identity_check",
    "is_achievable",
    "ldp_event_check",
    "likelihood_sandwich",
    "load_model",
    "process_entropy",
    "rate_doublet",
    "reconstruct_paths",
    "relative_entropy",
    "singleton_rate_constrained",
    "singleton_rate_variational",
]
