"""Unit tests for entropies, divergences and the Shannon-McMillan-Breiman statistic."""

import math

import numpy as np
import pytest

from markov_ldp.core.empirical import cyclic_empirical
from markov_ldp.core.exceptions import DomainError, StationarityError
from markov_ldp.core.information import (
    EntropyValue,
    agree,
    conditional_entropy,
    conditional_relative_entropy,
    conditional_relative_entropy_rows,
    entropy,
    loss_J,
    process_entropy,
    process_entropy_forms,
    relative_entropy,
    sanov_rate,
    smb_monte_carlo,
    smb_statistic,
)
from markov_ldp.core.markov_core import (
    KTupleDistribution,
    SamplePath,
    iid_model,
    model_from_transition,
    random_stationary,
)

WORKED_PATH = "abaccbacbc"


def _h(*p):
    return -sum(v * math.log(v) for v in p if v > 0)


class TestEntropy:
    """Plain and conditional entropies."""

    def test_uniform(self):
        assert entropy(KTupleDistribution.uniform(2, 1)) == pytest.approx(math.log(2), abs=1e-15)
        assert entropy(KTupleDistribution.uniform(3, 2)) == pytest.approx(2 * math.log(3), abs=1e-14)

    def test_point_mass(self):
        assert entropy(KTupleDistribution(2, 2, [0, 0, 1, 0])) == 0.0

    def test_entropy_value_bounds(self):
        assert EntropyValue.of(KTupleDistribution.uniform(2, 3)).value == pytest.approx(3 * math.log(2))
        with pytest.raises(DomainError):
            EntropyValue(2.0, 2, 1)

    def test_conditional_entropy_two_state(self, two_state):
        expected = 0.6 * _h(2 / 3, 1 / 3) + 0.4 * math.log(2)
        assert conditional_entropy(two_state.mu) == pytest.approx(expected, abs=1e-14)

    def test_conditional_entropy_needs_stationary(self):
        with pytest.raises(StationarityError):
            conditional_entropy(KTupleDistribution(2, 2, [0.0, 1.0, 0.0, 0.0]))

    def test_process_entropy_forms_agree(self, two_state, three_state, two_step, rng):
        models = [two_state, three_state, two_step]
        for model in models:
            direct, rows = process_entropy_forms(model)
            assert agree(direct, rows)
            assert process_entropy(model) == pytest.approx(direct, abs=1e-14)

    def test_iid_process_entropy(self, iid_uniform2, uniform3):
        assert process_entropy(iid_uniform2) == pytest.approx(math.log(2), abs=1e-14)
        assert process_entropy(uniform3) == pytest.approx(math.log(3), abs=1e-14)

    def test_conditional_entropy_is_nonnegative(self, rng):
        for n, k in ((2, 2), (3, 2), (2, 3)):
            for _ in range(20):
                assert conditional_entropy(random_stationary(n, k, rng)) >= 0.0

    def test_conditional_entropy_of_product(self, rng):
        for n in (2, 3, 4):
            q = rng.dirichlet(np.ones(n))
            model = iid_model(q)
            assert conditional_entropy(model.mu) == pytest.approx(entropy(model.mu_bar), abs=1e-12)

    def test_permutation_chain_has_no_entropy(self):
        model = model_from_transition([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        assert conditional_entropy(model.mu) == pytest.approx(0.0, abs=1e-12)
        assert process_entropy(model) == pytest.approx(0.0, abs=1e-12)

    def test_two_state_process_entropy(self):
        model = model_from_transition([[0.9, 0.1], [0.2, 0.8]])
        expected = 2 / 3 * _h(0.9, 0.1) + 1 / 3 * _h(0.2, 0.8)
        assert process_entropy(model) == pytest.approx(expected, abs=1e-12)
        assert process_entropy(model) == pytest.approx(0.3835, abs=1e-4)


class TestDivergence:
    """Relative entropy, loss and the conditional divergence."""

    def test_self_divergence(self, three_state):
        assert relative_entropy(three_state.mu, three_state.mu) == 0.0

    def test_divergence_is_positive_off_the_diagonal(self, rng):
        for _ in range(50):
            nu = random_stationary(3, 2, rng)
            mu = random_stationary(3, 2, rng)
            assert relative_entropy(nu, mu) > 0.0
            assert relative_entropy(mu, mu) == 0.0

    def test_joint_convexity(self, rng):
        for _ in range(100):
            nu1, nu2, mu1, mu2 = (random_stationary(2, 2, rng) for _ in range(4))
            weight = rng.uniform()
            mixed_nu = KTupleDistribution(2, 2, weight * nu1.p + (1 - weight) * nu2.p)
            mixed_mu = KTupleDistribution(2, 2, weight * mu1.p + (1 - weight) * mu2.p)
            bound = weight * relative_entropy(nu1, mu1) + (1 - weight) * relative_entropy(nu2, mu2)
            assert relative_entropy(mixed_nu, mixed_mu) <= bound + 1e-12

    def test_conditional_divergence_is_nonnegative(self, rng):
        for n, k in ((2, 2), (3, 2), (2, 3)):
            for _ in range(20):
                nu = random_stationary(n, k, rng)
                mu = random_stationary(n, k, rng)
                assert conditional_relative_entropy(nu, mu) >= 0.0
                assert conditional_relative_entropy_rows(nu, mu) >= 0.0

    def test_loss_identity(self, rng):
        for _ in range(10):
            nu = random_stationary(3, 2, rng)
            mu = random_stationary(3, 2, rng)
            assert relative_entropy(nu, mu) == pytest.approx(loss_J(nu, mu) - entropy(nu), abs=1e-12)

    def test_domination_failure_is_infinite(self):
        mu = KTupleDistribution(2, 2, [0.5, 0.0, 0.0, 0.5])
        nu = KTupleDistribution.uniform(2, 2)
        assert relative_entropy(nu, mu) == math.inf
        assert loss_J(nu, mu) == math.inf
        assert conditional_relative_entropy(nu, mu) == math.inf
        assert conditional_relative_entropy_rows(nu, mu) == math.inf

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            relative_entropy(KTupleDistribution.uniform(2, 2), KTupleDistribution.uniform(2, 1))

    def test_conditional_forms_agree_on_worked_path(self, uniform3):
        nu = cyclic_empirical(SamplePath.from_letters(WORKED_PATH, 3), 1).as_distribution
        direct = conditional_relative_entropy(nu, uniform3.mu)
        rows = conditional_relative_entropy_rows(nu, uniform3.mu)
        assert direct == pytest.approx(rows, abs=1e-14)
        assert direct == pytest.approx(math.log(3) - conditional_entropy(nu), abs=1e-14)

    def test_conditional_forms_agree_on_random_pairs(self, rng):
        for k in (2, 3):
            for _ in range(10):
                nu = random_stationary(2, k, rng)
                mu = random_stationary(2, k, rng)
                assert conditional_relative_entropy(nu, mu) == pytest.approx(
                    conditional_relative_entropy_rows(nu, mu), abs=1e-12
                )

    def test_conditional_divergence_zero_at_model(self, two_step):
        assert conditional_relative_entropy(two_step.mu, two_step.mu) == 0.0

    def test_sanov(self):
        phi = KTupleDistribution(2, 1, [0.25, 0.75])
        q = KTupleDistribution.uniform(2, 1)
        assert sanov_rate(phi, q) == pytest.approx(math.log(2) - _h(0.25, 0.75), abs=1e-15)
        with pytest.raises(DomainError):
            sanov_rate(KTupleDistribution.uniform(2, 2), KTupleDistribution.uniform(2, 2))

    def test_agree_with_infinities(self):
        assert agree(math.inf, math.inf)
        assert not agree(math.inf, 1e300)
        assert agree(1.0, 1.0 + 1e-13)


class TestSMB:
    """Per-symbol log-likelihood of sampled paths."""

    def test_statistic_iid(self, iid_uniform2):
        x = SamplePath((0, 1, 1, 0), 2)
        assert smb_statistic(iid_uniform2, x) == pytest.approx(math.log(2))

    def test_statistic_impossible_path(self):
        from markov_ldp.core.markov_core import build_model

        model = build_model(KTupleDistribution(2, 2, [0.5, 0.0, 0.0, 0.5]))
        assert smb_statistic(model, SamplePath((0, 1), 2)) == math.inf

    @pytest.mark.parametrize("fixture_name", ["two_state", "three_state", "two_step"])
    def test_convergence_to_process_entropy(self, request, fixture_name):
        model = request.getfixturevalue(fixture_name)
        summary = smb_monte_carlo(model, 10_000, range(200))
        assert len(summary.samples) == 200
        assert abs(summary.bias) <= 0.02
        assert summary.std <= 0.05
        assert np.all(np.isfinite(summary.samples))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
