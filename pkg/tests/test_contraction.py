"""Unit tests for the singleton rate of one-step chains."""

import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from markov_ldp.core.contraction import (
    contract,
    donsker_varadhan_row_form,
    g_objective,
    handy_identity_check,
    perturb_feasible,
    singleton_rate_constrained,
    singleton_rate_variational,
)
from markov_ldp.core.exceptions import DomainError, HypothesisError
from markov_ldp.core.information import conditional_relative_entropy_rows, relative_entropy
from markov_ldp.core.markov_core import (
    KTupleDistribution,
    build_model,
    check_stationary,
    iid_model,
    marginalize,
    marginalize_first,
    model_from_transition,
    random_model,
    random_stationary,
)


def _phi(*values):
    return KTupleDistribution(len(values), 1, values)


class TestObjective:
    """The function maximized by the variational form."""

    def test_balanced_point(self, two_state):
        assert g_objective(_phi(0.5, 0.5), two_state, [1.0, 2.0]) == pytest.approx(0.0, abs=1e-15)

    def test_scale_invariance(self, three_state, rng):
        phi = _phi(0.2, 0.3, 0.5)
        for _ in range(5):
            u = rng.uniform(0.1, 3.0, size=3)
            assert g_objective(phi, three_state, 7.5 * u) == pytest.approx(g_objective(phi, three_state, u), abs=1e-14)

    def test_rejects_non_positive_u(self, two_state):
        with pytest.raises(DomainError):
            g_objective(_phi(0.5, 0.5), two_state, [1.0, 0.0])

    def test_rejects_memory_two(self, two_step):
        with pytest.raises(DomainError):
            g_objective(_phi(0.5, 0.5), two_step, [1.0, 1.0])


class TestSingletonRate:
    """Variational, row-form and constrained evaluations."""

    def test_zero_at_stationary_marginal(self, three_state):
        phi = KTupleDistribution(3, 1, three_state.mu_bar.p)
        report = contract(phi, three_state)
        assert report.variational.value == pytest.approx(0.0, abs=1e-10)
        assert report.constrained.value == pytest.approx(0.0, abs=1e-10)
        assert report.row_form.value == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_iid_reduces_to_sanov(self, n, rng):
        for _ in range(100):
            q = rng.dirichlet(np.ones(n))
            model = iid_model(q)
            phi = KTupleDistribution(n, 1, rng.dirichlet(np.ones(n)))
            expected = relative_entropy(phi, model.mu_bar)
            assert singleton_rate_variational(phi, model).value == pytest.approx(expected, abs=1e-8)

    @pytest.mark.parametrize("n", [2, 3])
    def test_variational_matches_constrained(self, n, rng):
        for _ in range(100):
            model = random_model(n, 1, rng)
            phi = KTupleDistribution(n, 1, rng.dirichlet(np.ones(n)))
            variational = singleton_rate_variational(phi, model)
            constrained = singleton_rate_constrained(phi, model)
            assert variational.value == pytest.approx(constrained.value, abs=1e-8)
            assert np.allclose(variational.nu_star.p, constrained.nu.p, rtol=0, atol=1e-8)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_row_form_matches_variational(self, n, rng):
        for _ in range(100):
            model = random_model(n, 1, rng)
            phi = KTupleDistribution(n, 1, rng.dirichlet(np.ones(n)))
            report = contract(phi, model)
            assert report.row_form.value == pytest.approx(report.variational.value, abs=1e-6)

    def test_scalar_oracle_on_two_symbols(self, two_state):
        for first in (0.1, 0.35, 0.6, 0.9):
            phi = _phi(first, 1 - first)
            result = minimize_scalar(
                lambda v: -g_objective(phi, two_state, [1.0, math.exp(v)]),
                bounds=(-30.0, 30.0),
                method="bounded",
                options={"xatol": 1e-12},
            )
            value = singleton_rate_variational(phi, two_state).value
            assert value == pytest.approx(-result.fun, abs=1e-9)
            for v in np.linspace(-5.0, 5.0, 41):
                assert g_objective(phi, two_state, [1.0, math.exp(v)]) <= value + 1e-12

    def test_optimizer_structure(self, three_state):
        phi = _phi(0.1, 0.3, 0.6)
        solution = singleton_rate_variational(phi, three_state)
        assert solution.u_star[0] == pytest.approx(1.0)
        assert np.allclose(solution.b_matrix.sum(axis=1), 1.0, atol=1e-12)
        assert np.allclose(phi.p @ solution.b_matrix, phi.p, atol=1e-9)
        assert solution.residual <= 1e-10

    def test_tilted_measure(self, three_state):
        phi = _phi(0.1, 0.3, 0.6)
        solution = singleton_rate_variational(phi, three_state)
        nu = solution.nu_star
        assert check_stationary(nu, tol=1e-9).is_stationary
        assert np.allclose(marginalize(nu).p, phi.p, atol=1e-12)
        assert np.allclose(marginalize_first(nu).p, phi.p, atol=1e-9)
        assert conditional_relative_entropy_rows(nu, three_state.mu) == pytest.approx(solution.value, abs=1e-9)

    def test_duality_with_feasible_measures(self, three_state, rng):
        phi = _phi(0.25, 0.25, 0.5)
        constrained = singleton_rate_constrained(phi, three_state)
        assert constrained.identity_residual <= 1e-8
        for _ in range(20):
            nu = perturb_feasible(constrained.nu, rng)
            assert np.allclose(marginalize(nu).p, phi.p, atol=1e-12)
            assert conditional_relative_entropy_rows(nu, three_state.mu) >= constrained.value - 1e-10
        for _ in range(20):
            u = rng.uniform(0.1, 5.0, size=3)
            assert g_objective(phi, three_state, u) <= constrained.value + 1e-10

    def test_restricted_support(self, three_state):
        phi = _phi(0.4, 0.6, 0.0)
        report = contract(phi, three_state)
        assert report.variational.u_star[2] == 0.0
        assert report.variational.value == pytest.approx(report.constrained.value, abs=1e-8)
        assert report.row_form.value == pytest.approx(report.constrained.value, abs=1e-8)
        assert report.constrained.nu.prob((2, 2)) == 0.0

    @pytest.mark.parametrize("n", [2, 3])
    def test_skewed_models_agree(self, n, rng):
        for _ in range(30):
            model = build_model(random_stationary(n, 2, rng, concentration=0.2))
            phi = KTupleDistribution(n, 1, rng.dirichlet(np.ones(n)))
            report = contract(phi, model)
            assert report.variational.value == pytest.approx(report.constrained.value, rel=1e-6, abs=1e-8)
            assert report.row_form.value == pytest.approx(report.variational.value, rel=1e-6, abs=1e-8)

    def test_near_singular_model(self):
        model = build_model(random_stationary(3, 2, np.random.default_rng(5), concentration=0.2))
        phi = _phi(0.031, 0.120, 0.849)
        variational = singleton_rate_variational(phi, model)
        constrained = singleton_rate_constrained(phi, model)
        assert variational.residual <= 1e-10
        assert variational.value == pytest.approx(constrained.value, rel=1e-6)

    def test_non_positive_model_is_rejected(self):
        model = model_from_transition([[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.0, 0.5, 0.5]])
        phi = _phi(0.5, 0.0, 0.5)
        for solver in (singleton_rate_variational, singleton_rate_constrained, donsker_varadhan_row_form):
            with pytest.raises(HypothesisError, match="singleton rate"):
                solver(phi, model)
        with pytest.raises(HypothesisError):
            g_objective(phi, model, [1.0, 1.0, 1.0])

    def test_report_dict(self, two_state):
        payload = contract(_phi(0.3, 0.7), two_state).to_dict()
        assert set(payload) >= {"value_variational", "value_constrained", "value_row_form", "u_star", "nu_star"}
        assert len(payload["nu_star"]) == 4


class TestIdentity:
    """sum nu_ij c_i equals sum nu_ij c_j exactly when nu is stationary."""

    def test_stationary(self, three_state, rng):
        for _ in range(10):
            assert handy_identity_check(three_state.mu, rng.normal(size=3))

    def test_non_stationary(self):
        assert not handy_identity_check(KTupleDistribution(2, 2, [0.0, 1.0, 0.0, 0.0]), [1.0, 0.0])

    def test_shape_checks(self, three_state):
        with pytest.raises(DomainError):
            handy_identity_check(three_state.mu, [1.0, 2.0])
        with pytest.raises(DomainError):
            handy_identity_check(three_state.mu_bar, [1.0, 2.0, 3.0])

    def test_donsker_varadhan_row_form_alone(self, two_state):
        phi = _phi(0.3, 0.7)
        assert donsker_varadhan_row_form(phi, two_state).value == pytest.approx(
            singleton_rate_constrained(phi, two_state).value, abs=1e-8
        )


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
