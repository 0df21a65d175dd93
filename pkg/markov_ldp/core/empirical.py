"""Empirical estimators of tuple frequencies and the follower-set decomposition."""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from markov_ldp.core.exceptions import DomainError, ReconstructionError
from markov_ldp.core.markov_core import KTupleDistribution, SamplePath, window_indices


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Exact integer tuple counts of a path.

    ``total`` is the denominator: ``l`` for the singleton and cyclic
    estimators, ``l - 1`` for the raw doublet estimator.
    """

    n: int
    k: int
    l: int
    counts: np.ndarray = field(repr=False)
    total: int = -1

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64).reshape(-1)
        if counts.size != self.n ** self.k:
            raise DomainError(f"expected {self.n ** self.k} counts, got {counts.size}")
        if np.any(counts < 0):
            raise DomainError("counts must be nonnegative")
        total = int(counts.sum()) if self.total < 0 else self.total
        if int(counts.sum()) != total or total < 1:
            raise DomainError(f"counts sum to {int(counts.sum())}, expected {total}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total", total)

    @classmethod
    def from_counts(cls, counts: Sequence[int], n: int, k: int) -> "EmpiricalMeasure":
        """Counts of a cyclic estimator (denominator equals the path length)."""
        counts = np.asarray(counts, dtype=np.int64)
        return cls(n=n, k=k, l=int(counts.sum()), counts=counts)

    @property
    def key(self) -> Tuple[int, ...]:
        return tuple(int(v) for v in self.counts)

    @property
    def as_distribution(self) -> KTupleDistribution:
        return KTupleDistribution(self.n, self.k, self.counts / self.total)

    def marginal_counts(self) -> np.ndarray:
        """Counts of the leading ``k-1`` symbols (sum over the last one)."""
        return self.counts.reshape(-1, self.n).sum(axis=1)

    def reduced(self) -> "EmpiricalMeasure":
        """Integer-level marginalization over the last symbol."""
        if self.k < 2:
            raise DomainError("cannot reduce single-symbol counts")
        return EmpiricalMeasure(self.n, self.k - 1, self.l, self.marginal_counts(), self.total)

    def is_exactly_stationary(self) -> bool:
        """Integer balance of leading and trailing marginals at every order."""
        current, k = self.counts, self.k
        while k >= 2:
            tensor = current.reshape((self.n,) * k)
            last = tensor.sum(axis=-1).reshape(-1)
            if not np.array_equal(last, tensor.sum(axis=0).reshape(-1)):
                return False
            current, k = last, k - 1
        return True

    def __eq__(self, other) -> bool:
        return isinstance(other, EmpiricalMeasure) and (self.n, self.k, self.total, self.key) == (
            other.n,
            other.k,
            other.total,
            other.key,
        )

    def __hash__(self) -> int:
        return hash((self.n, self.k, self.total, self.key))


@dataclass(frozen=True)
class FollowerSets:
    """Ordered successors ``S(i)`` of every symbol along the ghost-augmented path."""

    n: int
    sets: Tuple[Tuple[int, ...], ...]

    @property
    def l(self) -> int:
        return sum(len(seq) for seq in self.sets)

    def __getitem__(self, symbol: int) -> Tuple[int, ...]:
        return self.sets[symbol]


def singleton_empirical(x: SamplePath) -> EmpiricalMeasure:
    """``phi_j = #{t : x_t = j} / l``."""
    counts = np.bincount(x.as_array(), minlength=x.n)
    return EmpiricalMeasure(n=x.n, k=1, l=x.l, counts=counts)


def doublet_empirical_raw(x: SamplePath) -> EmpiricalMeasure:
    """Consecutive-pair counts over ``l - 1`` transitions, without a ghost transition."""
    if x.l < 2:
        raise DomainError("the raw doublet estimator needs a path of length >= 2", l=x.l)
    counts = np.bincount(window_indices(x.as_array(), x.n, 2), minlength=x.n ** 2)
    return EmpiricalMeasure(n=x.n, k=2, l=x.l, counts=counts, total=x.l - 1)


def ghost_augmented(x: SamplePath, s: int) -> np.ndarray:
    """``x_1 .. x_l x_1 .. x_s``, wrapping as often as needed when ``s >= l``."""
    if s < 0:
        raise DomainError("memory must be nonnegative", s=s)
    return np.resize(x.as_array(), x.l + s)


def cyclic_empirical(x: SamplePath, s: int) -> EmpiricalMeasure:
    """``(s+1)``-tuple counts of the cyclically extended path; always exactly stationary."""
    if s < 1:
        raise DomainError("memory must be >= 1", s=s)
    windows = window_indices(ghost_augmented(x, s), x.n, s + 1)
    counts = np.bincount(windows, minlength=x.n ** (s + 1))
    return EmpiricalMeasure(n=x.n, k=s + 1, l=x.l, counts=counts)


def follower_sets(x: SamplePath) -> FollowerSets:
    """Successor sequences ``S(i)`` including the ghost transition ``x_l -> x_1``."""
    walk = ghost_augmented(x, 1).tolist()
    sets: List[List[int]] = [[] for _ in range(x.n)]
    for current, nxt in zip(walk[:-1], walk[1:]):
        sets[current].append(nxt)
    return FollowerSets(n=x.n, sets=tuple(tuple(seq) for seq in sets))


def reconstruct_paths(sets: FollowerSets, start: int) -> SamplePath:
    """Replay the follower sets from ``start``, consuming each ``S(v)`` in order."""
    if start < 0 or start >= sets.n:
        raise DomainError(f"start symbol {start} outside alphabet", start=start)
    length = sets.l
    if length < 1:
        raise DomainError("follower sets are empty")
    cursor = [0] * sets.n
    node = start
    path = []
    for _ in range(length):
        path.append(node)
        if cursor[node] >= len(sets[node]):
            raise ReconstructionError(f"walk stuck at node {node} after {len(path)} steps", node=node)
        nxt = sets[node][cursor[node]]
        cursor[node] += 1
        node = nxt
    if node != start:
        raise ReconstructionError(f"walk stuck at node {node}: it does not close at {start}", node=node)
    return SamplePath(tuple(path), sets.n)


def cyclic_count_matrix(paths: np.ndarray, n: int, s: int) -> np.ndarray:
    """Row-wise cyclic ``(s+1)``-tuple counts of an ``N x l`` symbol array."""
    paths = np.atleast_2d(np.asarray(paths, dtype=np.int64))
    rows, l = paths.shape
    size = n ** (s + 1)
    windows = window_indices(paths[:, np.arange(l + s) % l], n, s + 1)
    offsets = windows + size * np.arange(rows, dtype=np.int64)[:, None]
    return np.bincount(offsets.ravel(), minlength=rows * size).reshape(rows, size)
