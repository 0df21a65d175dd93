"""Rate function of the singleton frequencies of a one-step chain.

``J(phi)`` is computed three independent ways:

* the variational supremum ``sup_u sum phi_i log(u_i / (A u)_i)``, maximized by
  Newton's method in ``w = log u`` with ``w_1 = 0``;
* the same supremum with ``u A`` in place of ``A u``;
* the constrained minimum of ``D_c(nu || mu)`` over stationary ``nu`` with
  marginal ``phi``, solved by matrix scaling.

Every solver needs a strictly positive model. Zero entries of ``phi``
restrict every solver to the support of ``phi``.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp, rel_entr

from markov_ldp.config import settings
from markov_ldp.core.exceptions import ConvergenceError, DomainError, LDPError
from markov_ldp.core.information import relative_entropy
from markov_ldp.core.markov_core import KTupleDistribution, MarkovModel, marginalize, require_positive
from markov_ldp.utils.logger import RunLogger

ARMIJO = 1e-4
MAX_HALVINGS = 60
# Largest move of a single step in log u.
MAX_STEP = 4.0


# ============== Domain Types ==============

@dataclass(frozen=True, eq=False)
class VariationalSolution:
    """Optimizer of the variational form.

    ``u_star`` is 1 at the first symbol with ``phi_i > 0`` and 0 off the
    support of ``phi``. ``nu_star[i, j] = phi_i b_ij``.
    """

    u_star: np.ndarray
    value: float
    b_matrix: np.ndarray
    nu_star: KTupleDistribution
    residual: float
    iterations: int


@dataclass(frozen=True, eq=False)
class ConstrainedSolution:
    value: float
    nu: KTupleDistribution
    residual: float
    iterations: int
    identity_residual: float


@dataclass(frozen=True, eq=False)
class ContractionReport:
    """All three evaluations of ``J(phi)`` side by side."""

    variational: VariationalSolution
    constrained: ConstrainedSolution
    row_form: VariationalSolution

    def to_dict(self) -> dict:
        return {
            "value_variational": self.variational.value,
            "value_constrained": self.constrained.value,
            "value_row_form": self.row_form.value,
            "u_star": [float(v) for v in self.variational.u_star],
            "nu_star": [float(v) for v in self.variational.nu_star.p],
            "residual_variational": self.variational.residual,
            "residual_constrained": self.constrained.residual,
            "residual_row_form": self.row_form.residual,
        }


# ============== Helpers ==============

def _check_inputs(phi: KTupleDistribution, model: MarkovModel) -> np.ndarray:
    if model.s != 1:
        raise DomainError("singleton rates are defined for one-step chains", s=model.s)
    if phi.k != 1 or phi.n != model.n:
        raise DomainError("phi must be a distribution on single symbols of the model alphabet", n=phi.n)
    require_positive(model, "the singleton rate")
    return model.transition_matrix()


def _objective(phi: np.ndarray, log_matrix: np.ndarray, w: np.ndarray) -> Tuple[float, np.ndarray]:
    """Concave objective in ``w`` and the matrix ``b`` of its soft-max weights."""
    logits = log_matrix + w[None, :]
    lse = logsumexp(logits, axis=1)
    b = np.exp(logits - lse[:, None])
    return float(phi @ (w - lse)), b


def _capped(step: np.ndarray) -> np.ndarray:
    largest = float(np.max(np.abs(step)))
    return step if largest <= MAX_STEP else step * (MAX_STEP / largest)


def _line_search(
    phi: np.ndarray,
    log_matrix: np.ndarray,
    w: np.ndarray,
    value: float,
    residual: float,
    grad: np.ndarray,
    direction: np.ndarray,
) -> Optional[Tuple[np.ndarray, float, np.ndarray]]:
    """Armijo backtracking from ``t = 1``; ``None`` when every trial step is rejected.

    A step that lowers the gradient residual is also accepted, since close to
    the optimum the objective gain drops below float resolution first.
    """
    slope = float(grad @ direction)
    t = 1.0
    for _ in range(MAX_HALVINGS):
        trial = w + t * direction
        trial_value, trial_b = _objective(phi, log_matrix, trial)
        trial_residual = float(np.max(np.abs(phi - phi @ trial_b)))
        if trial_value >= value + ARMIJO * t * slope or trial_residual < residual:
            return trial, trial_value, trial_b
        t *= 0.5
    return None


def _maximize(phi: np.ndarray, matrix: np.ndarray, name: str) -> Tuple[np.ndarray, int, float]:
    """Newton ascent with Armijo backtracking; returns ``w`` with ``w[0] = 0``.

    Steps are capped at ``MAX_STEP`` in the max norm. When the Newton step is
    rejected the plain gradient step is tried instead.
    """
    size = phi.size
    w = np.zeros(size)
    if size == 1:
        return w, 0, 0.0
    log_matrix = np.log(matrix)
    tol, max_iter = settings.solver_tol, settings.solver_max_iter

    value, b = _objective(phi, log_matrix, w)
    for iteration in range(1, max_iter + 1):
        grad = phi - phi @ b
        residual = float(np.max(np.abs(grad)))
        if residual <= tol:
            return w, iteration - 1, residual

        weighted = b * phi[:, None]
        hessian = weighted.T @ b - np.diag(weighted.sum(axis=0))
        ascent = grad[1:]
        try:
            newton = np.linalg.solve(hessian[1:, 1:], -ascent)
        except np.linalg.LinAlgError:
            newton = ascent
        if not np.all(np.isfinite(newton)) or ascent @ newton <= 0:
            newton = ascent

        accepted = None
        for candidate in (newton, ascent):
            direction = np.concatenate([[0.0], _capped(candidate)])
            accepted = _line_search(phi, log_matrix, w, value, residual, grad, direction)
            if accepted is not None:
                break
        if accepted is None:
            raise ConvergenceError(f"{name}: line search stalled", best=np.exp(w), residual=residual)
        w, value, b = accepted

    residual = float(np.max(np.abs(phi - phi @ b)))
    if residual <= tol:
        return w, max_iter, residual
    raise ConvergenceError(f"{name}: no convergence after {max_iter} iterations", best=np.exp(w), residual=residual)


def _variational(phi: KTupleDistribution, matrix: np.ndarray, name: str) -> VariationalSolution:
    """``sup_u sum phi_i log(u_i / (M u)_i)`` for a positive ``M``."""
    n = phi.n
    support = np.flatnonzero(phi.p > 0)
    sub = matrix[np.ix_(support, support)]

    phi_s = phi.p[support]
    w, iterations, residual = _maximize(phi_s, sub, name)
    u = np.zeros(n)
    u[support] = np.exp(w)

    value = float(phi_s @ (w - np.log(sub @ u[support])))
    b_matrix = matrix * u[None, :] / (matrix @ u)[:, None]
    nu_star = KTupleDistribution(n, 2, (phi.p[:, None] * b_matrix).reshape(-1))
    RunLogger.log_solver(name, iterations, residual, value)
    return VariationalSolution(
        u_star=u,
        value=max(value, 0.0),
        b_matrix=b_matrix,
        nu_star=nu_star,
        residual=residual,
        iterations=iterations,
    )


# ============== Operations ==============

def g_objective(phi: KTupleDistribution, model: MarkovModel, u: Sequence[float]) -> float:
    """``g(u) = sum_i phi_i log(u_i / (A u)_i)``; terms with ``phi_i = 0`` vanish."""
    matrix = _check_inputs(phi, model)
    u = np.asarray(u, dtype=float)
    if u.shape != (model.n,) or np.any(~(u > 0)):
        raise DomainError("u must be a positive vector of length n")
    support = phi.p > 0
    return float(phi.p[support] @ (np.log(u[support]) - np.log((matrix @ u)[support])))


def singleton_rate_variational(phi: KTupleDistribution, model: MarkovModel) -> VariationalSolution:
    """Maximize ``g`` over ``u > 0``; builds ``b_ij = a_ij u_j / (A u)_i`` at the optimum."""
    return _variational(phi, _check_inputs(phi, model), "variational Au")


def donsker_varadhan_row_form(phi: KTupleDistribution, model: MarkovModel) -> VariationalSolution:
    """Same supremum with ``(u A)_i`` in the denominator."""
    return _variational(phi, _check_inputs(phi, model).T, "variational uA")


def singleton_rate_constrained(phi: KTupleDistribution, model: MarkovModel) -> ConstrainedSolution:
    """Minimize ``sum nu_ij log(nu_ij / (phi_i a_ij))`` over couplings of ``phi`` with itself.

    Solved by alternately rescaling rows and columns of ``K_ij = phi_i a_ij``.
    The value also equals ``inf D(nu || mu) - D(phi || mu_bar)``; the gap
    between the two is kept as ``identity_residual``.
    """
    matrix = _check_inputs(phi, model)
    n = phi.n
    support = np.flatnonzero(phi.p > 0)
    kernel = phi.p[support, None] * matrix[np.ix_(support, support)]

    target = phi.p[support]
    x, y = np.ones(target.size), np.ones(target.size)
    tol, max_iter = settings.solver_tol, settings.solver_max_iter
    residual = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        x = target / (kernel @ y)
        y = target / (kernel.T @ x)
        plan = x[:, None] * kernel * y[None, :]
        residual = float(np.max(np.abs(plan.sum(axis=1) - target)))
        if residual <= tol:
            break
    else:
        raise ConvergenceError(
            f"constrained: no convergence after {max_iter} iterations", best=plan.tolist(), residual=residual
        )

    full = np.zeros((n, n))
    full[np.ix_(support, support)] = plan / plan.sum()
    nu = KTupleDistribution(n, 2, full.reshape(-1))
    value = max(float(rel_entr(plan, kernel).sum()), 0.0)

    decomposed = relative_entropy(nu, model.mu) - relative_entropy(marginalize(nu), model.mu_bar)
    identity_residual = abs(value - decomposed)
    if identity_residual > 1e-8 * max(1.0, value):
        raise LDPError("constrained value and divergence decomposition disagree", value=value, decomposed=decomposed)
    RunLogger.log_solver("constrained", iterations, residual, value)
    return ConstrainedSolution(
        value=value,
        nu=nu,
        residual=residual,
        iterations=iterations,
        identity_residual=identity_residual,
    )


def contract(phi: KTupleDistribution, model: MarkovModel) -> ContractionReport:
    """Run the variational, row-form and constrained solvers on the same input."""
    return ContractionReport(
        variational=singleton_rate_variational(phi, model),
        constrained=singleton_rate_constrained(phi, model),
        row_form=donsker_varadhan_row_form(phi, model),
    )


def handy_identity_check(nu: KTupleDistribution, c: Sequence[float]) -> bool:
    """``sum_ij nu_ij c_i == sum_ij nu_ij c_j`` within 1e-12."""
    if nu.k != 2:
        raise DomainError("identity is stated for pair distributions", k=nu.k)
    c = np.asarray(c, dtype=float)
    if c.shape != (nu.n,):
        raise DomainError(f"c must have {nu.n} entries")
    table = nu.as_matrix()
    return abs(float(table.sum(axis=1) @ c) - float(table.sum(axis=0) @ c)) <= 1e-12


def perturb_feasible(nu: KTupleDistribution, rng: np.random.Generator, scale: float = 0.1) -> KTupleDistribution:
    """Random move along ``e_ij + e_ji - e_ii - e_jj`` directions.

    These directions keep both marginals, so the result stays stationary with
    the same ``nu_bar``. The step is halved until every entry is nonnegative.
    """
    if nu.k != 2:
        raise DomainError("perturbations are defined for pair distributions", k=nu.k)
    n = nu.n
    move = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            coef = rng.uniform(-1.0, 1.0)
            move[i, j] += coef
            move[j, i] += coef
            move[i, i] -= coef
            move[j, j] -= coef
    table = nu.as_matrix()
    step = scale
    while np.any(table + step * move < 0):
        step *= 0.5
        if step < 1e-300:
            return nu
    moved = np.clip(table + step * move, 0.0, None)
    return KTupleDistribution(n, 2, (moved / moved.sum()).reshape(-1))
