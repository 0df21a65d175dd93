"""Entropy, relative entropy, loss and their conditional (Markov) versions.

All quantities are in nats. ``0 log 0`` is 0, and a relative entropy whose
first argument is not dominated by the second is ``math.inf`` (a real float
infinity that propagates through arithmetic, never a large sentinel).
"""

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.special import entr, rel_entr, xlogy

from markov_ldp.config import settings
from markov_ldp.core.exceptions import DomainError, LDPError, StationarityError
from markov_ldp.core.markov_core import (
    KTupleDistribution,
    MarkovModel,
    SamplePath,
    check_stationary,
    exact_path_probability,
    marginalize,
    sample_path,
)
from markov_ldp.utils.logger import logger


@dataclass(frozen=True)
class EntropyValue:
    """Entropy of a k-tuple law, bounded by ``k log n``."""

    value: float
    n: int
    k: int

    def __post_init__(self):
        if self.value < 0 or self.value > self.k * math.log(self.n) + 1e-12:
            raise DomainError(f"entropy {self.value!r} outside [0, k log n]")

    @classmethod
    def of(cls, p: KTupleDistribution) -> "EntropyValue":
        return cls(entropy(p), p.n, p.k)


@dataclass(frozen=True)
class SMBSummary:
    """Spread of the per-symbol negative log-likelihood over seeded paths."""

    l: int
    samples: Tuple[float, ...]
    mean: float
    std: float
    process_entropy: float

    @property
    def bias(self) -> float:
        return self.mean - self.process_entropy


def agree(a: float, b: float, rtol: Optional[float] = None, atol: Optional[float] = None) -> bool:
    """Equality of two analytically equal quantities, infinities included."""
    rtol = settings.compare_rtol if rtol is None else rtol
    atol = settings.compare_atol if atol is None else atol
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= max(atol, rtol * max(abs(a), abs(b)))


def _same_shape(nu: KTupleDistribution, mu: KTupleDistribution) -> None:
    if (nu.n, nu.k) != (mu.n, mu.k):
        raise DomainError(
            f"shape mismatch: (n={nu.n}, k={nu.k}) vs (n={mu.n}, k={mu.k})",
        )


def _require_stationary(p: KTupleDistribution, name: str) -> None:
    if p.k < 2:
        raise DomainError(f"{name} must be a distribution on A^k with k >= 2", k=p.k)
    flag = check_stationary(p)
    if not flag.is_stationary:
        raise StationarityError(f"{name} is not stationary", flag.max_violation)


def entropy(p: KTupleDistribution) -> float:
    """``H(p) = -sum p_i log p_i``."""
    return float(entr(p.p).sum())


def relative_entropy(nu: KTupleDistribution, mu: KTupleDistribution) -> float:
    """Kullback-Leibler divergence ``D(nu || mu)``; ``inf`` when domination fails."""
    _same_shape(nu, mu)
    if np.any((nu.p > 0) & (mu.p == 0)):
        return math.inf
    return max(float(rel_entr(nu.p, mu.p).sum()), 0.0)


def loss_J(nu: KTupleDistribution, mu: KTupleDistribution) -> float:
    """Cross-entropy ``J(nu, mu) = sum nu_i log(1/mu_i)``; ``D = J - H``."""
    _same_shape(nu, mu)
    if np.any((nu.p > 0) & (mu.p == 0)):
        return math.inf
    return float(-xlogy(nu.p, mu.p).sum())


def conditional_entropy(p: KTupleDistribution) -> float:
    """``H_c(p) = H(p) - H(p_bar)`` for a stationary ``p``."""
    _require_stationary(p, "p")
    return max(entropy(p) - entropy(marginalize(p)), 0.0)


def conditional_relative_entropy(nu: KTupleDistribution, mu: KTupleDistribution) -> float:
    """``D_c(nu || mu) = D(nu || mu) - D(nu_bar || mu_bar)``.

    When ``D(nu || mu)`` is infinite the result is ``inf`` even if the marginal
    divergence is infinite too; the row form makes this the right limit.
    """
    _same_shape(nu, mu)
    _require_stationary(nu, "nu")
    _require_stationary(mu, "mu")
    full = relative_entropy(nu, mu)
    if math.isinf(full):
        return math.inf
    return max(full - relative_entropy(marginalize(nu), marginalize(mu)), 0.0)


def conditional_relative_entropy_rows(nu: KTupleDistribution, mu: KTupleDistribution) -> float:
    """Row form ``sum_i nu_bar_i sum_j c_ij log(c_ij / a_ij)`` of ``D_c``.

    ``c`` and ``a`` are the conditional rows of ``nu`` and ``mu``. Only rows with
    ``nu_bar_i > 0`` contribute.
    """
    _same_shape(nu, mu)
    if nu.k < 2:
        raise DomainError("row form needs k >= 2", k=nu.k)
    nu_rows, mu_rows = nu.as_matrix(), mu.as_matrix()
    nu_bar, mu_bar = nu_rows.sum(axis=1), mu_rows.sum(axis=1)
    total = 0.0
    for i in np.flatnonzero(nu_bar > 0):
        if mu_bar[i] == 0:
            return math.inf
        c_row = nu_rows[i] / nu_bar[i]
        a_row = mu_rows[i] / mu_bar[i]
        if np.any((c_row > 0) & (a_row == 0)):
            return math.inf
        total += nu_bar[i] * float(rel_entr(c_row, a_row).sum())
    return max(total, 0.0)


def process_entropy_forms(model: MarkovModel) -> Tuple[float, float]:
    """``(H(mu) - H(mu_bar), sum_i mu_bar_i H(a^i))`` without the consistency check."""
    direct = entropy(model.mu) - entropy(model.mu_bar)
    rows = sum(model.mu_bar.p[idx] * float(entr(row).sum()) for idx, row in model.rows.items())
    return direct, float(rows)


def process_entropy(model: MarkovModel) -> float:
    """Entropy rate ``H(mu) - H(mu_bar)``, cross-checked against ``sum_i mu_bar_i H(a^i)``."""
    direct, rows = process_entropy_forms(model)
    if not agree(direct, rows):
        logger.error(f"Process entropy forms disagree: {direct!r} vs {rows!r}")
        raise LDPError("process entropy forms disagree", direct=direct, row_form=rows)
    return max(direct, 0.0)


def smb_statistic(model: MarkovModel, x: SamplePath) -> float:
    """``h_l(x) = -(1/l) log Pr{X_1^l = x}``; ``inf`` for impossible paths."""
    log_prob = exact_path_probability(model, x)
    if math.isinf(log_prob):
        return math.inf
    return -log_prob / x.l


def smb_monte_carlo(model: MarkovModel, l: int, seeds: Iterable[int]) -> SMBSummary:
    """Sample ``h_l`` on one path per seed."""
    samples = tuple(smb_statistic(model, sample_path(model, l, seed)) for seed in seeds)
    values = np.asarray(samples)
    return SMBSummary(
        l=l,
        samples=samples,
        mean=float(values.mean()),
        std=float(values.std(ddof=1)) if values.size > 1 else 0.0,
        process_entropy=process_entropy(model),
    )


def sanov_rate(phi: KTupleDistribution, q: KTupleDistribution) -> float:
    """Rate of the singleton empirical law of i.i.d. ``q`` symbols: ``D(phi || q)``."""
    if phi.k != 1 or q.k != 1:
        raise DomainError("Sanov rate is defined on single-symbol laws")
    return relative_entropy(phi, q)
