"""Finite-l probabilities of empirical measures and the rate functions they converge to.

Everything here is exact at desk scale: probabilities of type classes come
from the census enumeration, and the ``o(1/l)`` terms of the limit
statements are replaced by explicit envelopes built from the type-class
bounds and the likelihood sandwich constants.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Tuple, Union

import numpy as np
from pydantic import TypeAdapter

from markov_ldp.config import settings
from markov_ldp.core.empirical import EmpiricalMeasure, cyclic_count_matrix, cyclic_empirical
from markov_ldp.core.exceptions import DomainError, HypothesisError, LDPError
from markov_ldp.core.information import (
    agree,
    conditional_relative_entropy,
    conditional_relative_entropy_rows,
)
from markov_ldp.core.markov_core import (
    KTupleDistribution,
    MarkovModel,
    SamplePath,
    check_stationary,
    exact_path_probability,
    path_log_probabilities,
    require_positive,
)
from markov_ldp.core.types_method import CountKey, TypeCensus, enumerate_census, is_achievable
from markov_ldp.schemas.models import BallEvent, ClassListEvent, EventSpec, HalfSpaceEvent
from markov_ldp.utils.logger import RunLogger, logger

# Membership tolerance for ball and half-space events evaluated on exact rationals.
EVENT_TOL = 1e-12


# ============== Domain Types ==============

@dataclass(frozen=True)
class SandwichConstants:
    """Extremes of ``mu_bar`` (``a``) and ``mu`` (``b``) and the derived offsets."""

    a_low: float
    a_high: float
    b_low: float
    b_high: float
    c_low: float
    c_high: float

    @property
    def c_abs(self) -> float:
        return max(abs(self.c_low), abs(self.c_high))


@dataclass(frozen=True)
class LikelihoodSandwich:
    lower: float
    exact: float
    upper: float

    @property
    def holds(self) -> bool:
        slack = settings.bound_slack
        return self.lower <= self.exact + slack and self.exact <= self.upper + slack


@dataclass(frozen=True)
class SandwichReport:
    """Outcome of the likelihood sandwich over a batch of paths."""

    l: int
    checked: int
    failures: int
    worst_lower_gap: float
    worst_upper_gap: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass(frozen=True)
class RateRow:
    """``exact`` is ``delta(l, zeta)`` or the normalized event log-probability."""

    l: int
    exact: float
    rate_proxy: float
    envelope: float
    passed: bool
    counts: Optional[CountKey] = None

    @property
    def gap(self) -> float:
        if math.isinf(self.exact) and math.isinf(self.rate_proxy) and self.exact == self.rate_proxy:
            return 0.0
        return self.exact - self.rate_proxy


@dataclass(frozen=True)
class RateReport:
    rows: Tuple[RateRow, ...]

    @property
    def failures(self) -> int:
        return sum(1 for row in self.rows if not row.passed)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    @property
    def gaps(self) -> Tuple[float, ...]:
        return tuple(row.gap for row in self.rows)


@dataclass(frozen=True, eq=False)
class EventSet:
    """Deterministic predicate over empirical measures.

    ``kind`` is one of ``all``, ``ball`` (l1 ball), ``halfspace``
    (``<c, nu> >= b``) or ``classes`` (explicit count vectors).
    """

    kind: str
    vector: Optional[np.ndarray] = None
    scalar: float = 0.0
    classes: FrozenSet[CountKey] = frozenset()

    @classmethod
    def everything(cls) -> "EventSet":
        return cls(kind="all")

    @classmethod
    def from_spec(cls, spec: Union[BallEvent, HalfSpaceEvent, ClassListEvent]) -> "EventSet":
        if isinstance(spec, BallEvent):
            return cls(kind="ball", vector=np.asarray(spec.center, dtype=float), scalar=spec.radius)
        if isinstance(spec, HalfSpaceEvent):
            return cls(kind="halfspace", vector=np.asarray(spec.c, dtype=float), scalar=spec.b)
        return cls(kind="classes", classes=frozenset(tuple(c) for c in spec.counts))

    def contains(self, zeta: EmpiricalMeasure) -> bool:
        if self.kind == "all":
            return True
        if self.kind == "classes":
            return zeta.key in self.classes
        if self.vector.size != zeta.counts.size:
            raise DomainError(f"event vector has {self.vector.size} entries, measure has {zeta.counts.size}")
        p = zeta.counts / zeta.total
        if self.kind == "ball":
            return float(np.abs(p - self.vector).sum()) <= self.scalar + EVENT_TOL
        return float(self.vector @ p) >= self.scalar - EVENT_TOL


def load_event(path: Union[str, Path]) -> EventSet:
    """Parse an event JSON file (``kind`` = ``ball``, ``halfspace`` or ``classes``)."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return EventSet.from_spec(TypeAdapter(EventSpec).validate_python(data))


# ============== Likelihood sandwich ==============

def sandwich_constants(model: MarkovModel) -> SandwichConstants:
    """``c_low = (s+1) log a_low - s log b_high``, ``c_high = (s+1) log a_high - s log b_low``."""
    require_positive(model, "the sandwich")
    a, b, s = model.mu_bar.p, model.mu.p, model.s
    a_low, a_high = float(a.min()), float(a.max())
    b_low, b_high = float(b.min()), float(b.max())
    return SandwichConstants(
        a_low=a_low,
        a_high=a_high,
        b_low=b_low,
        b_high=b_high,
        c_low=(s + 1) * math.log(a_low) - s * math.log(b_high),
        c_high=(s + 1) * math.log(a_high) - s * math.log(b_low),
    )


def _cyclic_log_likelihood(model: MarkovModel, counts: np.ndarray) -> np.ndarray:
    """``-l [J(nu, mu) - J(nu_bar, mu_bar)]`` from cyclic count rows."""
    counts = np.atleast_2d(counts)
    marginal = counts.reshape(counts.shape[0], -1, model.n).sum(axis=2)
    return counts @ np.log(model.mu.p) - marginal @ np.log(model.mu_bar.p)


def likelihood_sandwich(model: MarkovModel, x: SamplePath) -> LikelihoodSandwich:
    """Bracket ``log Pr{X_1^l = x}`` by the cyclic likelihood plus ``c_low`` / ``c_high``."""
    constants = sandwich_constants(model)
    if x.l <= model.s:
        raise DomainError(f"the sandwich needs l >= s+1, got l={x.l}", l=x.l, s=model.s)
    zeta = cyclic_empirical(x, model.s)
    core = float(_cyclic_log_likelihood(model, zeta.counts)[0])
    return LikelihoodSandwich(
        lower=core + constants.c_low,
        exact=exact_path_probability(model, x),
        upper=core + constants.c_high,
    )


def sandwich_check(model: MarkovModel, paths: np.ndarray) -> SandwichReport:
    """Vectorized sandwich over every row of an ``N x l`` path array."""
    constants = sandwich_constants(model)
    paths = np.atleast_2d(np.asarray(paths, dtype=np.int64))
    l = paths.shape[1]
    if l <= model.s:
        raise DomainError(f"the sandwich needs l >= s+1, got l={l}", l=l, s=model.s)
    core = _cyclic_log_likelihood(model, cyclic_count_matrix(paths, model.n, model.s))
    exact = path_log_probabilities(model, paths)
    lower_gap = exact - (core + constants.c_low)
    upper_gap = (core + constants.c_high) - exact
    slack = settings.bound_slack
    failures = int(np.count_nonzero((lower_gap < -slack) | (upper_gap < -slack)))
    report = SandwichReport(
        l=l,
        checked=paths.shape[0],
        failures=failures,
        worst_lower_gap=float(lower_gap.min()),
        worst_upper_gap=float(upper_gap.min()),
    )
    RunLogger.log_verification(f"likelihood sandwich l={l}", report.checked, failures, "PASS" if report.passed else "FAIL")
    return report


# ============== Rate functions ==============

def _require_positive(mu: KTupleDistribution) -> None:
    if np.any(mu.p <= 0):
        raise HypothesisError("rate functions need a strictly positive mu")


def rate_doublet(nu: KTupleDistribution, mu: KTupleDistribution) -> float:
    """``D_c(nu || mu)`` on ``A^2``, cross-checked against the row form."""
    if nu.k != 2 or mu.k != 2:
        raise DomainError("rate_doublet works on pair distributions", k=nu.k)
    _require_positive(mu)
    value = conditional_relative_entropy(nu, mu)
    rows = conditional_relative_entropy_rows(nu, mu)
    if not agree(value, rows, rtol=0.0, atol=1e-12 * max(1.0, abs(value))):
        raise LDPError("conditional relative entropy forms disagree", direct=value, row_form=rows)
    return value


def rate_theta(theta: KTupleDistribution, mu: KTupleDistribution) -> float:
    """Rate of the raw doublet estimator: row-form ``D_c`` on the stationary set, ``+inf`` off it."""
    if theta.k != 2 or mu.k != 2:
        raise DomainError("rate_theta works on pair distributions", k=theta.k)
    _require_positive(mu)
    if not check_stationary(theta).is_stationary:
        return math.inf
    return conditional_relative_entropy_rows(theta, mu)


def rate_ktuple(nu: KTupleDistribution, mu: KTupleDistribution) -> float:
    """``D(nu || mu) - D(nu_bar || mu_bar)`` at order ``s+1``."""
    _require_positive(mu)
    return conditional_relative_entropy(nu, mu)


# ============== Exact finite-l probabilities ==============

def rate_envelope(l: int, n: int, s: int, c_abs: float) -> float:
    """``(n^{s+1} log(2l) + max(|c_low|, |c_high|) + log l) / l``."""
    return (n ** (s + 1) * math.log(2 * l) + c_abs + math.log(l)) / l


def union_term(l: int, n: int, s: int) -> float:
    """``n^{s+1} log(l+1) / l``: log of the class-count bound, per symbol."""
    return n ** (s + 1) * math.log(l + 1) / l


def _census_for(model: MarkovModel, l: int, census: Optional[TypeCensus], budget: Optional[int]) -> TypeCensus:
    if census is None:
        return enumerate_census(l, model.n, model.s, model=model, budget=budget)
    if census.log_masses is None or (census.n, census.s, census.l) != (model.n, model.s, l):
        raise DomainError("census was not taken under this model at this length")
    return census


def delta_exact(
    model: MarkovModel,
    zeta: EmpiricalMeasure,
    census: Optional[TypeCensus] = None,
    budget: Optional[int] = None,
) -> float:
    """``(1/l) log Pr{nu(X_1^l) = zeta}``; ``-inf`` for measures no path produces."""
    if zeta.k != model.s + 1 or zeta.n != model.n:
        raise DomainError("measure does not match the model", n=zeta.n, k=zeta.k)
    if not is_achievable(zeta):
        return -math.inf
    census = _census_for(model, zeta.l, census, budget)
    if zeta.key not in census.entries:
        return -math.inf
    return census.log_masses[zeta.key] / zeta.l


def delta_vs_rate(
    model: MarkovModel,
    zeta: EmpiricalMeasure,
    census: Optional[TypeCensus] = None,
    constants: Optional[SandwichConstants] = None,
) -> RateRow:
    """Compare ``delta(l, zeta)`` with ``-D_c(zeta || mu)`` inside the explicit envelope."""
    constants = sandwich_constants(model) if constants is None else constants
    delta = delta_exact(model, zeta, census)
    rate = -rate_ktuple(zeta.as_distribution, model.mu)
    envelope = rate_envelope(zeta.l, model.n, model.s, constants.c_abs)
    passed = not math.isinf(delta) and abs(delta - rate) <= envelope + settings.bound_slack
    return RateRow(l=zeta.l, exact=delta, rate_proxy=rate, envelope=envelope, passed=passed, counts=zeta.key)


def census_rate_check(model: MarkovModel, census: TypeCensus) -> RateReport:
    """:func:`delta_vs_rate` for every class of a census taken under ``model``."""
    constants = sandwich_constants(model)
    rows = tuple(delta_vs_rate(model, zeta, census, constants) for zeta in census.measures())
    report = RateReport(rows=rows)
    RunLogger.log_verification(
        f"rate envelope n={census.n} l={census.l} s={census.s}",
        len(rows),
        report.failures,
        "PASS" if report.passed else "FAIL",
    )
    return report


def census_total_probability(census: TypeCensus) -> float:
    """``sum_zeta Pr{nu = zeta}``, compensated; should equal 1."""
    if census.log_masses is None:
        raise DomainError("census carries no class probabilities")
    return math.fsum(math.exp(value) for value in census.log_masses.values())


def _log_sum_exp(values: List[float]) -> float:
    if not values:
        return -math.inf
    top = max(values)
    if math.isinf(top):
        return top
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def ldp_event_check(
    model: MarkovModel,
    gamma: EventSet,
    l_schedule: Iterable[int],
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> RateReport:
    """Exact ``(1/l) log Pr{nu(X_1^l) in gamma}`` against ``-min D_c`` over the census.

    A length whose census misses ``gamma`` entirely records ``-inf`` for both
    columns.
    """
    constants = sandwich_constants(model)
    n, s = model.n, model.s
    rows = []
    for l in l_schedule:
        census = enumerate_census(l, n, s, model=model, budget=budget, workers=workers)
        members = [zeta for zeta in census.measures() if gamma.contains(zeta)]
        tolerance = rate_envelope(l, n, s, constants.c_abs) + union_term(l, n, s)
        if not members:
            logger.info(f"Event misses every class at l={l}")
            rows.append(RateRow(l=l, exact=-math.inf, rate_proxy=-math.inf, envelope=tolerance, passed=True))
            continue
        # every path is in the event
        if len(members) == len(census):
            exact = 0.0
        else:
            exact = min(_log_sum_exp([census.log_masses[zeta.key] for zeta in members]) / l, 0.0)
        proxy = -min(rate_ktuple(zeta.as_distribution, model.mu) for zeta in members)
        passed = abs(exact - proxy) <= tolerance + settings.bound_slack
        rows.append(RateRow(l=l, exact=exact, rate_proxy=proxy, envelope=tolerance, passed=passed))
    report = RateReport(rows=tuple(rows))
    RunLogger.log_verification(f"event {gamma.kind}", len(rows), report.failures, "PASS" if report.passed else "FAIL")
    return report
