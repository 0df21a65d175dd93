"""Alphabets, k-tuple distributions, stationarity and Markov chain reconstruction.

Tuples over ``A = {0, ..., n-1}`` are flattened lexicographically with the
first symbol most significant, so ``(i_1, ..., i_k)`` lives at
``sum_t i_t * n**(k - t)``. Every vector the toolkit reads or writes uses this
order. Logarithms are natural throughout.
"""

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from markov_ldp.config import settings
from markov_ldp.core.exceptions import DomainError, HypothesisError, StationarityError
from markov_ldp.schemas.models import ModelFile
from markov_ldp.utils.logger import logger

LETTERS = "abcdefghijklmnopqrstuvwxyz"


# ============== Domain Types ==============

@dataclass(frozen=True)
class Alphabet:
    """Finite symbol set ``{0, ..., n-1}``."""

    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise DomainError(f"alphabet size must be >= 1, got {self.n}", n=self.n)

    @property
    def symbols(self) -> range:
        return range(self.n)

    def tuples(self, k: int) -> List[Tuple[int, ...]]:
        """All of ``A^k`` in canonical (flat index) order."""
        return [unflat_index(idx, self.n, k) for idx in range(self.n ** k)]


@dataclass(frozen=True, eq=False)
class KTupleDistribution:
    """Probability vector over ``A^k`` in lexicographic order."""

    n: int
    k: int
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise DomainError("need n >= 1 and k >= 1", n=self.n, k=self.k)
        p = np.array(self.p, dtype=float).reshape(-1)
        if p.size != self.n ** self.k:
            raise DomainError(
                f"expected {self.n ** self.k} entries for n={self.n}, k={self.k}, got {p.size}",
                n=self.n,
                k=self.k,
            )
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise DomainError("distribution entries must be finite and nonnegative")
        total = float(p.sum())
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"distribution sums to {total!r}, not 1", total=total)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_counts(cls, counts: Sequence[int], n: int, k: int) -> "KTupleDistribution":
        counts = np.asarray(counts, dtype=np.int64)
        return cls(n, k, counts / counts.sum())

    @classmethod
    def uniform(cls, n: int, k: int) -> "KTupleDistribution":
        return cls(n, k, np.full(n ** k, 1.0 / n ** k))

    def tensor(self) -> np.ndarray:
        return self.p.reshape((self.n,) * self.k)

    def as_matrix(self) -> np.ndarray:
        """Rows indexed by the leading ``k-1`` symbols, columns by the last one."""
        return self.p.reshape(self.n ** (self.k - 1), self.n)

    def prob(self, tup: Sequence[int]) -> float:
        return float(self.p[flat_index(tup, self.n)])

    def allclose(self, other: "KTupleDistribution", atol: float = 1e-12) -> bool:
        return (self.n, self.k) == (other.n, other.k) and bool(np.allclose(self.p, other.p, rtol=0, atol=atol))


@dataclass(frozen=True)
class StationaryFlag:
    is_stationary: bool
    max_violation: float


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Stationary ``(s+1)``-tuple law plus its marginal and conditional rows.

    ``rows`` maps the flat index of every ``i in A^s`` with positive mass to
    the conditional distribution of the next symbol. Zero-mass states keep
    their index but get no row.
    """

    s: int
    mu: KTupleDistribution
    mu_bar: KTupleDistribution
    rows: Dict[int, np.ndarray] = field(repr=False)

    @property
    def n(self) -> int:
        return self.mu.n

    def transition_matrix(self) -> np.ndarray:
        """``n^s x n`` matrix of conditional rows; dropped states are zero rows."""
        out = np.zeros((self.n ** self.s, self.n))
        for idx, row in self.rows.items():
            out[idx] = row
        return out

    def lifted_matrix(self) -> np.ndarray:
        """One-step lift on ``A^s``: ``(i_1..i_s) -> (i_2..i_s j)`` with prob ``row_i(j)``."""
        states = self.n ** self.s
        lift = np.zeros((states, states))
        for idx, row in self.rows.items():
            base = (idx * self.n) % states
            lift[idx, base:base + self.n] = row
        return lift

    def to_dict(self) -> dict:
        return {"n": self.n, "s": self.s, "mu": [float(v) for v in self.mu.p]}


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Finite symbol sequence ``x_1^l`` over an alphabet of size ``n``."""

    symbols: Tuple[int, ...]
    n: int

    def __post_init__(self):
        symbols = tuple(int(v) for v in self.symbols)
        if not symbols:
            raise DomainError("sample path must have length >= 1")
        if self.n < 1 or any(v < 0 or v >= self.n for v in symbols):
            raise DomainError(f"path symbols must lie in 0..{self.n - 1}", n=self.n)
        object.__setattr__(self, "symbols", symbols)

    @property
    def l(self) -> int:
        return len(self.symbols)

    @classmethod
    def from_letters(cls, text: str, n: int) -> "SamplePath":
        """``"abaccbacbc"`` style paths, ``a`` being symbol 0."""
        return cls(tuple(LETTERS.index(ch) for ch in text), n)

    def to_letters(self) -> str:
        return "".join(LETTERS[v] for v in self.symbols)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.symbols, dtype=np.int64)

    def __eq__(self, other) -> bool:
        return isinstance(other, SamplePath) and (self.symbols, self.n) == (other.symbols, other.n)

    def __hash__(self) -> int:
        return hash((self.symbols, self.n))


# ============== Indexing ==============

def flat_index(tup: Sequence[int], n: int) -> int:
    """Lexicographic index of a tuple over ``A = {0..n-1}``."""
    idx = 0
    for sym in tup:
        sym = int(sym)
        if sym < 0 or sym >= n:
            raise DomainError(f"symbol {sym} outside alphabet 0..{n - 1}", symbol=sym, n=n)
        idx = idx * n + sym
    return idx


def unflat_index(idx: int, n: int, k: int) -> Tuple[int, ...]:
    if idx < 0 or idx >= n ** k:
        raise DomainError(f"index {idx} outside 0..{n ** k - 1}")
    out = []
    for _ in range(k):
        idx, sym = divmod(idx, n)
        out.append(sym)
    return tuple(reversed(out))


def window_indices(paths: np.ndarray, n: int, width: int) -> np.ndarray:
    """Flat indices of every length-``width`` window of each row of ``paths``."""
    powers = n ** np.arange(width - 1, -1, -1, dtype=np.int64)
    windows = sliding_window_view(np.asarray(paths, dtype=np.int64), width, axis=-1)
    return windows @ powers


# ============== Stationarity & marginals ==============

def marginalize(p: KTupleDistribution) -> KTupleDistribution:
    """Sum over the last symbol: ``mu_bar_i = sum_j mu_{i j}``."""
    if p.k < 2:
        raise DomainError("cannot marginalize a distribution on single symbols", k=p.k)
    return KTupleDistribution(p.n, p.k - 1, _renormalized(p.as_matrix().sum(axis=1)))


def marginalize_first(p: KTupleDistribution) -> KTupleDistribution:
    """Sum over the first symbol."""
    if p.k < 2:
        raise DomainError("cannot marginalize a distribution on single symbols", k=p.k)
    return KTupleDistribution(p.n, p.k - 1, _renormalized(p.p.reshape(p.n, -1).sum(axis=0)))


def reduce(p: KTupleDistribution, times: int) -> KTupleDistribution:
    """Apply :func:`marginalize` ``times`` times."""
    for _ in range(times):
        p = marginalize(p)
    return p


def check_stationary(p: KTupleDistribution, tol: Optional[float] = None) -> StationaryFlag:
    """Recursive consistency check: leading and trailing marginals coincide at every order."""
    tol = settings.stationary_tol if tol is None else tol
    worst = 0.0
    current = p.p
    k = p.k
    while k >= 2:
        tensor = current.reshape((p.n,) * k)
        last = tensor.sum(axis=-1).reshape(-1)
        first = tensor.sum(axis=0).reshape(-1)
        worst = max(worst, float(np.max(np.abs(last - first))))
        current = last
        k -= 1
    return StationaryFlag(is_stationary=worst <= tol, max_violation=worst)


def build_model(mu: KTupleDistribution, tol: Optional[float] = None) -> MarkovModel:
    """Recover ``mu_bar`` and the conditional rows ``a_{ij} = mu_{ij} / mu_bar_i``."""
    if mu.k < 2:
        raise DomainError("a Markov model needs tuples of length s+1 >= 2", k=mu.k)
    flag = check_stationary(mu, tol)
    if not flag.is_stationary:
        raise StationarityError("tuple distribution is not stationary", flag.max_violation)

    s = mu.k - 1
    mu_bar = marginalize(mu)
    table = mu.as_matrix()
    rows: Dict[int, np.ndarray] = {}
    for idx in np.flatnonzero(mu_bar.p > 0):
        row = table[idx] / mu_bar.p[idx]
        if abs(row.sum() - 1.0) > settings.row_tol:
            raise DomainError(f"row {idx} sums to {row.sum()!r}", row=int(idx))
        row.setflags(write=False)
        rows[int(idx)] = row

    model = MarkovModel(s=s, mu=mu, mu_bar=mu_bar, rows=rows)
    drift = float(np.max(np.abs(mu_bar.p @ model.lifted_matrix() - mu_bar.p)))
    if drift > settings.eigen_tol:
        raise StationarityError("mu_bar is not a left eigenvector of the lifted chain", drift)
    return model


# ============== Paths ==============

def safe_log(values: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(values)


def path_log_probabilities(model: MarkovModel, paths: np.ndarray) -> np.ndarray:
    """Vectorized ``log Pr{X_1^l = x}`` for every row of an ``N x l`` symbol array."""
    paths = np.atleast_2d(np.asarray(paths, dtype=np.int64))
    n, s = model.n, model.s
    if paths.shape[1] < s:
        raise DomainError(f"path length {paths.shape[1]} is shorter than memory {s}")
    log_mu = safe_log(model.mu.p)
    log_bar = safe_log(model.mu_bar.p)

    out = log_bar[window_indices(paths[:, :s], n, s)[:, 0]]
    if paths.shape[1] > s:
        windows = window_indices(paths, n, s + 1)
        prefix_log = log_bar[windows // n]
        # mu(w) <= mu_bar(prefix), so a zero prefix already forces a zero window
        steps = log_mu[windows] - np.where(np.isfinite(prefix_log), prefix_log, 0.0)
        out = out + steps.sum(axis=1)
    return out


def exact_path_probability(model: MarkovModel, x: SamplePath) -> float:
    """Natural log of ``Pr{X_1^l = x_1^l}``; ``-inf`` for impossible paths."""
    if x.n != model.n:
        raise DomainError("path alphabet does not match the model", path_n=x.n, model_n=model.n)
    if x.l < model.s:
        raise DomainError(f"path length {x.l} is shorter than memory {model.s}", l=x.l, s=model.s)
    return float(path_log_probabilities(model, x.as_array()[None, :])[0])


def sample_path(model: MarkovModel, l: int, seed: int) -> SamplePath:
    """Draw ``x_1^l`` with numpy's PCG64 generator seeded by ``seed``."""
    n, s = model.n, model.s
    if l < s:
        raise DomainError(f"path length {l} is shorter than memory {s}", l=l, s=s)
    rng = np.random.default_rng(seed)
    start = int(rng.choice(n ** s, p=model.mu_bar.p))
    symbols = list(unflat_index(start, n, s))

    cdfs = {idx: np.cumsum(row).tolist() for idx, row in model.rows.items()}
    last_support = {idx: int(np.flatnonzero(row > 0)[-1]) for idx, row in model.rows.items()}
    states = n ** s
    state = start
    for u in rng.random(l - s).tolist():
        sym = min(bisect_right(cdfs[state], u), last_support[state])
        symbols.append(sym)
        state = (state * n + sym) % states
    return SamplePath(tuple(symbols), n)


# ============== Construction helpers ==============

def stationary_vector(matrix: np.ndarray) -> np.ndarray:
    """Left Perron vector of a stochastic matrix, normalized to sum 1."""
    eigenvalues, eigenvectors = np.linalg.eig(np.asarray(matrix, dtype=float).T)
    index = int(np.argmin(np.abs(eigenvalues - 1.0)))
    vec = np.real(eigenvectors[:, index])
    vec = vec / vec.sum()
    if np.any(vec < -1e-10):
        raise DomainError("transition matrix has no nonnegative stationary vector")
    return _renormalized(np.clip(vec, 0.0, None))


def model_from_transition(transition: Union[np.ndarray, Sequence[Sequence[float]]]) -> MarkovModel:
    """Build the stationary chain for an ``n^s x n`` matrix of conditional rows.

    The stationary law of the lifted chain must be unique, which holds for
    irreducible chains.
    """
    transition = np.asarray(transition, dtype=float)
    states, n = transition.shape
    s = int(round(np.log(states) / np.log(n))) if n > 1 else 1
    if n ** s != states:
        raise DomainError(f"row count {states} is not a power of the alphabet size {n}")
    if np.any(transition < 0) or np.any(np.abs(transition.sum(axis=1) - 1.0) > settings.row_tol):
        raise DomainError("transition rows must be nonnegative and sum to 1")

    lift = np.zeros((states, states))
    for idx in range(states):
        base = (idx * n) % states
        lift[idx, base:base + n] = transition[idx]
    mu_bar = stationary_vector(lift)
    mu = (mu_bar[:, None] * transition).reshape(-1)
    return build_model(KTupleDistribution(n, s + 1, _renormalized(mu)))


def iid_model(q: Sequence[float], s: int = 1) -> MarkovModel:
    """Independent symbols with law ``q`` viewed as an ``s``-step chain."""
    q = np.asarray(q, dtype=float)
    mu = q
    for _ in range(s):
        mu = np.multiply.outer(mu, q).reshape(-1)
    return build_model(KTupleDistribution(q.size, s + 1, _renormalized(mu)))


def random_stationary(n: int, k: int, rng: np.random.Generator, concentration: float = 1.0) -> KTupleDistribution:
    """Stationary law of a random chain with Dirichlet rows (strictly positive a.s.)."""
    if k == 1:
        return KTupleDistribution(n, 1, rng.dirichlet(np.full(n, concentration)))
    transition = rng.dirichlet(np.full(n, concentration), size=n ** (k - 1))
    return model_from_transition(transition).mu


def random_model(n: int, s: int, rng: np.random.Generator, concentration: float = 1.0) -> MarkovModel:
    return build_model(random_stationary(n, s + 1, rng, concentration))


def is_positive(model: MarkovModel) -> bool:
    """Strict positivity of every ``(s+1)``-tuple probability."""
    return bool(np.all(model.mu.p > 0))


def is_irreducible(model: MarkovModel) -> bool:
    """Single communicating class on the states with positive mass."""
    support = np.flatnonzero(model.mu_bar.p > 0)
    lift = model.lifted_matrix()[np.ix_(support, support)]
    count, _ = connected_components(csr_matrix(lift > 0), directed=True, connection="strong")
    return count == 1


def require_positive(model: MarkovModel, purpose: str) -> None:
    if not is_positive(model):
        reason = "irreducible but not strictly positive" if is_irreducible(model) else "not strictly positive"
        raise HypothesisError(f"model is {reason}; {purpose} needs mu > 0", n=model.n, s=model.s)


# ============== Files ==============

def model_from_file_data(data: Union[dict, ModelFile]) -> MarkovModel:
    spec = data if isinstance(data, ModelFile) else ModelFile(**data)
    return build_model(KTupleDistribution(spec.n, spec.s + 1, np.asarray(spec.mu, dtype=float)))


def load_model(path: Union[str, Path]) -> MarkovModel:
    """Parse and validate a model JSON file; non-stationary input is rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    model = model_from_file_data(data)
    logger.info(f"Loaded model n={model.n} s={model.s} from {path}")
    return model


def save_model(model: MarkovModel, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh)
        fh.write("\n")


def load_paths(path: Union[str, Path], n: int) -> List[SamplePath]:
    """One path per line, symbols as space-separated integers; blank lines skipped."""
    paths = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                paths.append(SamplePath(tuple(int(tok) for tok in line.split()), n))
    return paths


def format_paths(paths: Iterable[SamplePath]) -> str:
    return "".join(" ".join(str(v) for v in x.symbols) + "\n" for x in paths)


def _renormalized(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return values / values.sum()
