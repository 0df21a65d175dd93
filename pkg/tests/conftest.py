"""Shared fixtures for the Markov LDP test suite."""

from pathlib import Path

import numpy as np
import pytest

from markov_ldp.core.markov_core import KTupleDistribution, build_model, iid_model, model_from_transition

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture(scope="session")
def samples_dir() -> Path:
    return SAMPLES


@pytest.fixture(scope="session")
def two_state():
    """mu = (0.4, 0.2, 0.2, 0.2): mu_bar = (0.6, 0.4), rows (2/3, 1/3) and (1/2, 1/2)."""
    return build_model(KTupleDistribution(2, 2, [0.4, 0.2, 0.2, 0.2]))


@pytest.fixture(scope="session")
def three_state():
    """Symmetric, hence stationary, strictly positive pair law on three symbols."""
    return build_model(KTupleDistribution(3, 2, [0.2, 0.1, 0.05, 0.1, 0.15, 0.1, 0.05, 0.1, 0.15]))


@pytest.fixture(scope="session")
def iid_uniform2():
    return iid_model([0.5, 0.5])


@pytest.fixture(scope="session")
def uniform3():
    return iid_model([1 / 3, 1 / 3, 1 / 3])


@pytest.fixture(scope="session")
def two_step():
    """Strictly positive two-step chain on two symbols."""
    return model_from_transition([[0.7, 0.3], [0.4, 0.6], [0.2, 0.8], [0.5, 0.5]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
