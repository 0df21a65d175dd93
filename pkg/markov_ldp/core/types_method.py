"""Method of types: exact census of E(l, n, s+1), type-class sizes and their bounds.

The census enumerates all ``n^l`` paths in fixed-length prefix partitions.
Each partition is processed independently (optionally in worker processes)
and partial results are merged in prefix order, so the result does not
depend on the number of workers.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import gammaln, xlogy

from markov_ldp.config import settings
from markov_ldp.core.empirical import EmpiricalMeasure, cyclic_count_matrix
from markov_ldp.core.exceptions import BudgetExceededError, DomainError
from markov_ldp.core.markov_core import (
    KTupleDistribution,
    MarkovModel,
    check_stationary,
    path_log_probabilities,
)
from markov_ldp.utils.logger import RunLogger, logger

# Largest number of paths materialized per partition.
MAX_CHUNK_PATHS = 1 << 18

CountKey = Tuple[int, ...]


# ============== Domain Types ==============

@dataclass(frozen=True, eq=False)
class TypeCensus:
    """Every achievable empirical measure at length ``l`` with its class size.

    ``log_masses`` is present when the census was taken under a model and
    holds ``log Pr{nu(X_1^l) = zeta}`` for every class.
    """

    n: int
    l: int
    s: int
    entries: Dict[CountKey, int]
    log_masses: Optional[Dict[CountKey, float]] = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return self.s + 1

    @classmethod
    def from_entries(cls, n: int, l: int, s: int, entries: Iterable[Tuple[Sequence[int], int]]) -> "TypeCensus":
        """Rebuild a census read from disk; counts must have ``n^{s+1}`` entries summing to ``l``."""
        size = n ** (s + 1)
        cards: Dict[CountKey, int] = {}
        for counts, card in entries:
            key = tuple(int(v) for v in counts)
            if len(key) != size or sum(key) != l or min(key) < 0:
                raise DomainError(f"census entry {list(key)} is not a count vector on A^{s + 1} with total {l}")
            if card < 1:
                raise DomainError(f"census entry {list(key)} has cardinality {card}")
            cards[key] = cards.get(key, 0) + int(card)
        return cls(n=n, l=l, s=s, entries={key: cards[key] for key in sorted(cards)})

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key) -> bool:
        if isinstance(key, EmpiricalMeasure):
            key = key.key
        return tuple(key) in self.entries

    def keys(self) -> List[CountKey]:
        return list(self.entries)

    def measures(self) -> Iterator[EmpiricalMeasure]:
        for key in self.entries:
            yield EmpiricalMeasure(n=self.n, k=self.k, l=self.l, counts=np.asarray(key))

    def total_paths(self) -> int:
        return sum(self.entries.values())

    def to_entries(self) -> List[dict]:
        return [{"counts": list(key), "cardinality": card} for key, card in self.entries.items()]


@dataclass(frozen=True)
class MultinomialBounds:
    """``(2m)^{-(n-1)} e^{mH} <= C(m; m_1..m_n) <= e^{mH}`` in log space."""

    log_lower: float
    log_exact: float
    log_upper: float
    verified: bool

    @property
    def holds(self) -> bool:
        slack = settings.bound_slack
        return self.log_lower <= self.log_exact + slack and self.log_exact <= self.log_upper + slack


@dataclass(frozen=True)
class PermutationBounds:
    """Follower-set permutation bounds on ``|T(zeta)|``; exact rationals for small ``l``."""

    log_lower: float
    log_upper: float
    lower: Optional[Fraction] = None
    upper: Optional[Fraction] = None

    def contains(self, cardinality: int) -> bool:
        if self.lower is not None and self.upper is not None:
            return self.lower <= cardinality <= self.upper
        log_card = math.log(cardinality)
        slack = settings.bound_slack
        return self.log_lower <= log_card + slack and log_card <= self.log_upper + slack


@dataclass(frozen=True)
class ClassBounds:
    counts: CountKey
    cardinality: int
    conditional_entropy: float
    log_lower: float
    log_cardinality: float
    log_upper: float
    permutation: PermutationBounds
    passed: bool


@dataclass(frozen=True)
class BoundsReport:
    """Type-class sandwich over a whole census."""

    n: int
    l: int
    s: int
    rows: Tuple[ClassBounds, ...]
    verified: bool
    mass_conserved: bool = True

    @property
    def failures(self) -> int:
        return sum(1 for row in self.rows if not row.passed)

    @property
    def status(self) -> str:
        if not self.mass_conserved:
            return "FAIL"
        if not self.verified:
            return "UNVERIFIED"
        return "PASS" if self.failures == 0 else "FAIL"


# ============== Enumeration ==============

def required_path_steps(l: int, n: int) -> int:
    return n ** l * l


def _prefix_length(l: int, n: int, workers: int) -> int:
    if settings.prefix_length is not None:
        return max(0, min(l, settings.prefix_length))
    if n == 1:
        return 0
    prefix = 0
    while prefix < l and (n ** (l - prefix) > MAX_CHUNK_PATHS or n ** prefix < 4 * workers and workers > 1):
        prefix += 1
    return prefix


def _digits(count: int, n: int, width: int) -> np.ndarray:
    """Rows ``0..count-1`` written as base-``n`` digit vectors of length ``width``."""
    if width == 0:
        return np.zeros((count, 0), dtype=np.int64)
    powers = n ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return (np.arange(count, dtype=np.int64)[:, None] // powers) % n


def all_paths(n: int, l: int) -> np.ndarray:
    """Every path of ``A^l`` as an ``n^l x l`` array, in lexicographic order."""
    return _digits(n ** l, n, l)


def _census_partition(job: tuple) -> List[Tuple[CountKey, int, Optional[np.ndarray]]]:
    """Classes of all paths sharing one prefix, in lexicographic class order."""
    prefix_index, prefix_len, n, l, s, model = job
    suffix_len = l - prefix_len
    suffixes = _digits(n ** suffix_len, n, suffix_len)
    prefix = _digits(prefix_index + 1, n, prefix_len)[prefix_index]
    paths = np.hstack([np.broadcast_to(prefix, (suffixes.shape[0], prefix_len)), suffixes])
    counts = cyclic_count_matrix(paths, n, s)

    keys, inverse, cards = np.unique(counts, axis=0, return_inverse=True, return_counts=True)
    groups = [None] * len(keys)
    if model is not None:
        log_probs = path_log_probabilities(model, paths)
        order = np.argsort(inverse.reshape(-1), kind="stable")
        groups = np.split(log_probs[order], np.cumsum(cards)[:-1])
    return [(tuple(int(v) for v in key), int(card), members) for key, card, members in zip(keys, cards, groups)]


def _log_sum(values: List[np.ndarray]) -> float:
    merged = np.concatenate(values)
    top = float(merged.max())
    if math.isinf(top):
        return top
    return top + math.log(math.fsum(np.exp(merged - top).tolist()))


def enumerate_census(
    l: int,
    n: int,
    s: int = 1,
    model: Optional[MarkovModel] = None,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> TypeCensus:
    """Exact census of cyclic empirical measures over all ``n^l`` paths."""
    if l < 1 or n < 1 or s < 1:
        raise DomainError("need l >= 1, n >= 1, s >= 1", l=l, n=n, s=s)
    if model is not None and (model.n, model.s) != (n, s):
        raise DomainError("model alphabet/memory do not match the census", n=n, s=s)
    budget = settings.budget if budget is None else budget
    workers = settings.workers if workers is None else workers
    required = required_path_steps(l, n)
    if required > budget:
        raise BudgetExceededError(required, budget)

    start = time.time()
    prefix_len = _prefix_length(l, n, workers)
    jobs = [(idx, prefix_len, n, l, s, model) for idx in range(n ** prefix_len)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            partials = list(executor.map(_census_partition, jobs))
    else:
        partials = [_census_partition(job) for job in jobs]

    cards: Dict[CountKey, int] = {}
    members: Dict[CountKey, List[np.ndarray]] = {}
    for partial in partials:
        for key, card, log_probs in partial:
            cards[key] = cards.get(key, 0) + card
            if log_probs is not None:
                members.setdefault(key, []).append(log_probs)

    ordered = sorted(cards)
    entries = {key: cards[key] for key in ordered}
    log_masses = {key: _log_sum(members[key]) for key in ordered} if model is not None else None
    RunLogger.log_census(n, l, s, len(entries), workers, (time.time() - start) * 1000)
    return TypeCensus(n=n, l=l, s=s, entries=entries, log_masses=log_masses)


def type_count_bound(l: int, n: int, s: int = 1) -> int:
    """Polynomial bound ``(l+1)^{n^{s+1}}`` on ``|E(l, n, s+1)|``."""
    return (l + 1) ** (n ** (s + 1))


def stationary_count_vectors(l: int, n: int, s: int = 1) -> Iterator[EmpiricalMeasure]:
    """All integer-balanced count vectors on ``A^{s+1}`` with total ``l``."""
    size = n ** (s + 1)
    for bars in combinations(range(l + size - 1), size - 1):
        edges = (-1,) + bars + (l + size - 1,)
        counts = np.asarray([edges[i + 1] - edges[i] - 1 for i in range(size)], dtype=np.int64)
        zeta = EmpiricalMeasure(n=n, k=s + 1, l=l, counts=counts)
        if zeta.is_exactly_stationary():
            yield zeta


# ============== Bounds ==============

def log_factorial(m: int) -> float:
    if m <= settings.exact_factorial_limit:
        return math.log(math.factorial(m))
    return float(gammaln(m + 1))


def multinomial_bounds(m: int, m_vec) -> MultinomialBounds:
    """Classic entropy bounds on the multinomial coefficient ``m! / prod m_i!``."""
    m_vec = np.asarray(m_vec, dtype=np.int64)
    if np.any(m_vec < 0) or int(m_vec.sum()) != m or m < 1:
        raise DomainError("m_vec must be nonnegative and sum to m >= 1", m=m)
    n = m_vec.size
    m_h = float(xlogy(m, m) - xlogy(m_vec, m_vec).sum())
    log_exact = log_factorial(m) - sum(log_factorial(int(v)) for v in m_vec)
    return MultinomialBounds(
        log_lower=m_h - (n - 1) * math.log(2 * m),
        log_exact=log_exact,
        log_upper=m_h,
        verified=m >= n,
    )


def permutation_bounds(zeta: EmpiricalMeasure) -> PermutationBounds:
    """``prod (lbar_i - 1)! / prod l_ij!  <=  |T|  <=  l prod lbar_i! / prod l_ij!``.

    ``lbar_i`` runs over the nodes ``i in A^s`` with positive out-degree.
    """
    if zeta.k < 2:
        raise DomainError("permutation bounds need (s+1)-tuple counts with s >= 1")
    if not zeta.is_exactly_stationary():
        raise DomainError("permutation bounds need integer-balanced counts")
    degrees = [int(v) for v in zeta.marginal_counts() if v > 0]
    edges = [int(v) for v in zeta.counts if v > 0]
    l = zeta.total

    log_denominator = sum(log_factorial(v) for v in edges)
    log_lower = sum(log_factorial(d - 1) for d in degrees) - log_denominator
    log_upper = math.log(l) + sum(log_factorial(d) for d in degrees) - log_denominator
    if l > settings.exact_factorial_limit:
        return PermutationBounds(log_lower=log_lower, log_upper=log_upper)

    denominator = math.prod(math.factorial(v) for v in edges)
    lower = Fraction(math.prod(math.factorial(d - 1) for d in degrees), denominator)
    upper = Fraction(l * math.prod(math.factorial(d) for d in degrees), denominator)
    return PermutationBounds(log_lower=log_lower, log_upper=log_upper, lower=lower, upper=upper)


def scaled_conditional_entropy(zeta: EmpiricalMeasure) -> float:
    """``l H_c(zeta) = sum lbar log lbar - sum l_ij log l_ij`` from exact counts."""
    return float(xlogy(zeta.marginal_counts(), zeta.marginal_counts()).sum() - xlogy(zeta.counts, zeta.counts).sum())


def census_bounds_check(census: TypeCensus) -> BoundsReport:
    """Check ``(2l)^{-n^{s+1}} e^{l H_c} <= |T| <= l e^{l H_c}`` and the permutation bounds."""
    n, l, s = census.n, census.l, census.s
    slack = settings.bound_slack
    log_poly = n ** (s + 1) * math.log(2 * l)
    rows = []
    for zeta in census.measures():
        card = census.entries[zeta.key]
        l_hc = scaled_conditional_entropy(zeta)
        log_card = math.log(card)
        log_lower = l_hc - log_poly
        log_upper = math.log(l) + l_hc
        perm = permutation_bounds(zeta)
        passed = log_lower <= log_card + slack and log_card <= log_upper + slack and perm.contains(card)
        rows.append(
            ClassBounds(
                counts=zeta.key,
                cardinality=card,
                conditional_entropy=l_hc / l,
                log_lower=log_lower,
                log_cardinality=log_card,
                log_upper=log_upper,
                permutation=perm,
                passed=passed,
            )
        )
    mass_conserved = census.total_paths() == n ** l
    if not mass_conserved:
        logger.warning(f"Census covers {census.total_paths()} paths, expected {n ** l}")
    report = BoundsReport(n=n, l=l, s=s, rows=tuple(rows), verified=l >= n, mass_conserved=mass_conserved)
    RunLogger.log_verification(f"type-class bounds n={n} l={l} s={s}", len(rows), report.failures, report.status)
    return report


# ============== Achievability ==============

def is_achievable(zeta: EmpiricalMeasure) -> bool:
    """Balanced counts whose de Bruijn-type multigraph is one strongly connected component."""
    if zeta.k < 2:
        return True
    if not zeta.is_exactly_stationary():
        return False
    n, states = zeta.n, zeta.n ** (zeta.k - 1)
    support = np.flatnonzero(zeta.counts > 0)
    sources = support // n
    targets = support % states
    nodes = np.unique(np.concatenate([sources, targets]))
    local = {int(node): pos for pos, node in enumerate(nodes)}
    graph = csr_matrix(
        (np.ones(support.size), ([local[int(v)] for v in sources], [local[int(v)] for v in targets])),
        shape=(nodes.size, nodes.size),
    )
    components, _ = connected_components(graph, directed=True, connection="strong")
    return components == 1


# ============== Nearest empirical measure ==============

def nearest_distance_bound(l: int, n: int, s: int = 1) -> float:
    """``2 (s+3) n^{s+1} / l``."""
    return 2 * (s + 3) * n ** (s + 1) / l


def nearest_empirical(
    psi: KTupleDistribution,
    l: int,
    census: Optional[TypeCensus] = None,
    budget: Optional[int] = None,
) -> Tuple[EmpiricalMeasure, float]:
    """Closest member of ``E(l, n, s+1)`` to ``psi`` in l1; ties go to the lexicographically first."""
    if psi.k < 2:
        raise DomainError("psi must be a distribution on A^(s+1) with s >= 1")
    flag = check_stationary(psi)
    if not flag.is_stationary:
        raise DomainError("psi is not stationary", max_violation=flag.max_violation)
    s = psi.k - 1
    if census is None:
        census = enumerate_census(l, psi.n, s, budget=budget)
    elif (census.n, census.l, census.s) != (psi.n, l, s):
        raise DomainError("census does not match psi and l")

    keys = census.keys()
    distances = np.abs(np.asarray(keys, dtype=float) / l - psi.p[None, :]).sum(axis=1)
    # float sums can split exact ties; rank the near-minimal keys in exact arithmetic
    near = np.flatnonzero(distances <= distances.min() + 1e-9)
    target = [Fraction(float(v)) * l for v in psi.p]
    scaled, best = min((sum(abs(int(c) - t) for c, t in zip(keys[i], target)), tuple(keys[i])) for i in near)
    zeta = EmpiricalMeasure(n=psi.n, k=psi.k, l=l, counts=np.asarray(best))
    distance = float(scaled / l)
    bound = nearest_distance_bound(l, psi.n, s)
    if distance > bound:
        logger.warning(f"Nearest empirical distance {distance:.6g} exceeds bound {bound:.6g}")
    return zeta, distance
