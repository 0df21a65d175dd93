"""Unit tests for the type-class census, its bounds and achievability."""

import math
from fractions import Fraction

import numpy as np
import pytest

from markov_ldp.core.empirical import EmpiricalMeasure, cyclic_empirical
from markov_ldp.core.exceptions import BudgetExceededError, DomainError
from markov_ldp.core.markov_core import KTupleDistribution, SamplePath, random_stationary
from markov_ldp.core.types_method import (
    TypeCensus,
    all_paths,
    census_bounds_check,
    enumerate_census,
    is_achievable,
    multinomial_bounds,
    nearest_distance_bound,
    nearest_empirical,
    permutation_bounds,
    required_path_steps,
    scaled_conditional_entropy,
    stationary_count_vectors,
    type_count_bound,
)

WORKED_PATH = "abaccbacbc"


class TestCensus:
    """Exhaustive enumeration of cyclic empirical measures."""

    def test_smallest_binary_census(self):
        census = enumerate_census(2, 2)
        assert census.entries == {(0, 0, 0, 2): 1, (0, 1, 1, 0): 2, (2, 0, 0, 0): 1}
        assert census.log_masses is None

    def test_length_one(self):
        census = enumerate_census(1, 2)
        assert census.keys() == [(0, 0, 0, 1), (1, 0, 0, 0)]

    @pytest.mark.parametrize("n, l, s", [(2, 8, 1), (3, 6, 1), (2, 7, 2), (2, 3, 4)])
    def test_mass_conservation(self, n, l, s):
        census = enumerate_census(l, n, s)
        assert census.total_paths() == n ** l
        assert all(int(sum(key)) == l for key in census.keys())

    def test_keys_sorted(self):
        keys = enumerate_census(7, 2).keys()
        assert keys == sorted(keys)

    def test_contains_measure(self):
        census = enumerate_census(10, 3)
        zeta = cyclic_empirical(SamplePath.from_letters(WORKED_PATH, 3), 1)
        assert zeta in census
        assert census.entries[zeta.key] >= 10

    def test_budget(self):
        assert required_path_steps(6, 2) == 384
        with pytest.raises(BudgetExceededError) as exc:
            enumerate_census(6, 2, budget=383)
        assert exc.value.required == 384
        assert len(enumerate_census(6, 2, budget=384)) > 0

    def test_invalid_arguments(self, three_state):
        with pytest.raises(DomainError):
            enumerate_census(0, 2)
        with pytest.raises(DomainError):
            enumerate_census(4, 2, model=three_state)

    def test_independent_of_workers(self, two_state):
        serial = enumerate_census(9, 2, model=two_state, workers=1)
        parallel = enumerate_census(9, 2, model=two_state, workers=2)
        assert serial.entries == parallel.entries
        assert list(serial.entries) == list(parallel.entries)
        assert serial.log_masses == parallel.log_masses

    def test_log_masses_sum_to_one(self, three_state):
        census = enumerate_census(7, 3, model=three_state)
        total = math.fsum(math.exp(v) for v in census.log_masses.values())
        assert abs(total - 1.0) <= 1e-9

    def test_all_paths_order(self):
        assert all_paths(2, 2).tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]

    def test_class_count_bound(self):
        for l in range(1, 9):
            assert len(enumerate_census(l, 2)) <= type_count_bound(l, 2)


class TestFromEntries:
    """Rebuilding a census read from a file."""

    def test_merges_and_sorts(self):
        census = TypeCensus.from_entries(2, 2, 1, [((2, 0, 0, 0), 1), ((0, 1, 1, 0), 1), ((0, 1, 1, 0), 1)])
        assert census.entries == {(0, 1, 1, 0): 2, (2, 0, 0, 0): 1}

    def test_rejects_wrong_total(self):
        with pytest.raises(DomainError):
            TypeCensus.from_entries(2, 2, 1, [((1, 0, 0, 0), 1)])

    def test_rejects_empty_class(self):
        with pytest.raises(DomainError):
            TypeCensus.from_entries(2, 2, 1, [((2, 0, 0, 0), 0)])

    def test_round_trip(self):
        census = enumerate_census(6, 2)
        entries = [(e["counts"], e["cardinality"]) for e in census.to_entries()]
        assert TypeCensus.from_entries(2, 6, 1, entries).entries == census.entries


class TestMultinomial:
    """Entropy bounds on multinomial coefficients."""

    def test_binomial(self):
        bounds = multinomial_bounds(4, [2, 2])
        assert bounds.log_exact == pytest.approx(math.log(6))
        assert bounds.log_upper == pytest.approx(math.log(16))
        assert bounds.log_lower == pytest.approx(math.log(2))
        assert bounds.verified and bounds.holds

    def test_trinomial(self):
        bounds = multinomial_bounds(3, [1, 1, 1])
        assert bounds.log_upper == pytest.approx(math.log(27))
        assert bounds.holds

    def test_unverified_when_m_small(self):
        assert not multinomial_bounds(1, [1, 0, 0]).verified

    def test_rejects_bad_vector(self):
        with pytest.raises(DomainError):
            multinomial_bounds(3, [1, 1])

    def test_large_m_uses_gammaln(self):
        bounds = multinomial_bounds(200, [50, 70, 80])
        assert bounds.holds
        assert bounds.log_exact == pytest.approx(
            math.lgamma(201) - math.lgamma(51) - math.lgamma(71) - math.lgamma(81), rel=1e-12
        )


class TestPermutationBounds:
    """Follower-set counting bounds on class sizes."""

    def test_worked_class(self):
        zeta = cyclic_empirical(SamplePath.from_letters(WORKED_PATH, 3), 1)
        bounds = permutation_bounds(zeta)
        assert bounds.lower == Fraction(3)
        assert bounds.upper == Fraction(1080)
        card = enumerate_census(10, 3).entries[zeta.key]
        assert bounds.contains(card)

    def test_tight_on_alternating_class(self):
        bounds = permutation_bounds(EmpiricalMeasure.from_counts([0, 1, 1, 0], 2, 2))
        assert bounds.lower == 1 and bounds.upper == 2

    def test_product_form_brackets_rotations(self):
        zeta = EmpiricalMeasure.from_counts([2, 1, 1, 0], 2, 2)
        bounds = permutation_bounds(zeta)
        assert bounds.lower == Fraction(1)
        assert bounds.upper == Fraction(12)
        assert enumerate_census(4, 2).entries[zeta.key] == 4

    def test_needs_balanced_counts(self):
        with pytest.raises(DomainError):
            permutation_bounds(EmpiricalMeasure.from_counts([0, 2, 0, 0], 2, 2))

    def test_log_only_for_long_paths(self):
        bounds = permutation_bounds(EmpiricalMeasure.from_counts([10, 6, 6, 8], 2, 2))
        assert bounds.lower is None
        assert bounds.log_lower < bounds.log_upper


class TestBoundsCheck:
    """Conditional-entropy sandwich on every class of a census."""

    @pytest.mark.parametrize(
        "n, s, l",
        [(2, 1, l) for l in range(2, 17)] + [(3, 1, l) for l in range(3, 11)] + [(2, 2, l) for l in range(4, 13)],
    )
    def test_exhaustive_regimes(self, n, s, l):
        report = census_bounds_check(enumerate_census(l, n, s))
        assert report.status == "PASS"
        assert report.failures == 0
        assert report.mass_conserved
        assert all(row.permutation.contains(row.cardinality) for row in report.rows)

    def test_short_paths_unverified(self):
        report = census_bounds_check(enumerate_census(2, 3))
        assert report.status == "UNVERIFIED"
        assert not report.verified

    def test_tampered_cardinality_fails(self):
        census = enumerate_census(8, 2)
        entries = dict(census.entries)
        key = max(entries, key=entries.get)
        entries[key] *= 50
        report = census_bounds_check(TypeCensus(n=2, l=8, s=1, entries=entries))
        assert report.status == "FAIL"
        assert not report.mass_conserved

    def test_scaled_entropy_from_counts(self):
        zeta = EmpiricalMeasure.from_counts([2, 2, 2, 2], 2, 2)
        assert scaled_conditional_entropy(zeta) == pytest.approx(8 * math.log(2))


class TestAchievability:
    """Balanced and connected count vectors are exactly the census."""

    @pytest.mark.parametrize(
        "n, s, lengths",
        [(2, 1, range(1, 9)), (3, 1, range(1, 7)), (2, 2, range(1, 7))],
    )
    def test_matches_census(self, n, s, lengths):
        for l in lengths:
            achievable = {z.key for z in stationary_count_vectors(l, n, s) if is_achievable(z)}
            assert achievable == set(enumerate_census(l, n, s).keys())

    def test_disconnected_balanced_vector(self):
        zeta = EmpiricalMeasure.from_counts([1, 0, 0, 1], 2, 2)
        assert zeta.is_exactly_stationary()
        assert not is_achievable(zeta)

    def test_unbalanced_vector(self):
        assert not is_achievable(EmpiricalMeasure.from_counts([0, 2, 0, 0], 2, 2))

    def test_balanced_vectors_count(self):
        assert len(list(stationary_count_vectors(2, 2))) == 4


class TestNearest:
    """Closest achievable measure to a stationary law."""

    def test_uniform_pairs(self):
        zeta, distance = nearest_empirical(KTupleDistribution.uniform(2, 2), 2)
        assert zeta.key == (0, 1, 1, 0)
        assert distance == pytest.approx(1.0)

    def test_ties_go_to_first_key(self):
        zeta, distance = nearest_empirical(KTupleDistribution(2, 2, [0.5, 0.0, 0.0, 0.5]), 2)
        assert zeta.key == (0, 0, 0, 2)
        assert distance == pytest.approx(1.0)

    def test_exact_ties_on_thirds(self):
        zeta, distance = nearest_empirical(KTupleDistribution.uniform(2, 2), 3)
        assert zeta.key == (0, 1, 1, 1)
        assert distance == 0.5

    def test_rejects_non_stationary(self):
        with pytest.raises(DomainError):
            nearest_empirical(KTupleDistribution(2, 2, [0.0, 1.0, 0.0, 0.0]), 4)

    def test_distance_bound(self, rng):
        for l in (4, 6, 8, 10):
            census = enumerate_census(l, 2)
            for _ in range(100):
                psi = random_stationary(2, 2, rng)
                zeta, distance = nearest_empirical(psi, l, census=census)
                assert zeta in census
                assert distance <= nearest_distance_bound(l, 2)
                brute = min(np.abs(np.asarray(key) / l - psi.p).sum() for key in census.keys())
                assert distance == pytest.approx(brute, abs=1e-15)

    def test_census_mismatch(self, two_state):
        with pytest.raises(DomainError):
            nearest_empirical(two_state.mu, 5, census=enumerate_census(4, 2))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
