"""Per-family loss, coordinate derivatives, dual variables, and sub-solvers.

Three model families share one interface:

* gaussian -- squared-error loss ``|y - X b|^2 / (2n)``, solved on an active
  set by Cholesky factorization of the Gram matrix.
* binomial -- logistic negative log-likelihood with a free (unpenalized)
  intercept, solved by iteratively reweighted least squares.
* cox      -- negative partial likelihood over event-time risk sets
  (Breslow handling of ties), solved by damped Newton-Raphson, optionally
  with the Hessian replaced by its diagonal.

For a coefficient vector ``b`` the coordinate functions are
``g_j = d loss / d b_j`` and ``h_j = d^2 loss / d b_j^2`` with all other
coordinates held fixed.  The dual variable of an inactive coordinate is the
Newton step ``gamma_j = -g_j / h_j`` away from zero, and the sacrifice
``delta_j`` measures how much the local quadratic model of the loss would
grow if that coordinate were forced (back) to zero:

    active j:   gamma_j = 0,            delta_j = h_j * b_j^2 / 2
    inactive j: gamma_j = -g_j / h_j,   delta_j = h_j * gamma_j^2 / 2
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .data import Binary, Continuous, StandardizedDataset, Survival

# Guards against degenerate numerics; the solvers are otherwise exact.
CURVATURE_FLOOR = 1e-10
IRLS_WEIGHT_FLOOR = 1e-10
LINEAR_PREDICTOR_CLIP = 30.0
RIDGE_JITTER = 1e-8


@dataclass(frozen=True)
class ModelFamily:
    """Loss family tag plus sub-solver options."""

    tag: str
    solver_tol: float = 1e-8
    irls_max_iter: int = 100
    newton_max_iter: int = 100
    diagonal_hessian: bool = False

    def __post_init__(self):
        if self.tag not in ("gaussian", "binomial", "cox"):
            raise ValueError(f"unknown family {self.tag!r}")
        if self.solver_tol <= 0:
            raise ValueError("solver_tol must be positive")
        if self.irls_max_iter < 1 or self.newton_max_iter < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass(frozen=True, eq=False)
class CoefficientModel:
    """A fitted coefficient vector restricted to an active set.

    ``beta`` is always a full p-vector with zeros off the active set;
    ``intercept`` is nonzero only for the binomial family.
    """

    beta: np.ndarray
    intercept: float
    active_set: tuple[int, ...]
    solver_converged: bool = True
    solver_iterations: int = 0

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        beta.setflags(write=False)
        active = tuple(int(j) for j in self.active_set)
        if active and (min(active) < 0 or max(active) >= beta.shape[0]):
            raise ValueError("active_set index out of range")
        off = np.ones(beta.shape[0], dtype=bool)
        if active:
            off[list(active)] = False
        if np.any(beta[off] != 0.0):
            raise ValueError("beta must vanish off the active set")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "active_set", active)


def _check_family(family: ModelFamily, d: StandardizedDataset) -> None:
    kind_by_tag = {"gaussian": Continuous, "binomial": Binary, "cox": Survival}
    if not isinstance(d.dataset.response, kind_by_tag[family.tag]):
        raise ValueError(
            f"family {family.tag!r} does not match response type "
            f"{type(d.dataset.response).__name__}"
        )


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    # clip before exponentiation; branch split keeps every exp argument <= 0
    eta = np.clip(eta, -LINEAR_PREDICTOR_CLIP, LINEAR_PREDICTOR_CLIP)
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    expe = np.exp(eta[~pos])
    out[~pos] = expe / (1.0 + expe)
    return out


def _cox_sorted(d: StandardizedDataset):
    """Rows sorted by descending time plus the end index of each tie block.

    After sorting, the risk set of the observation at position i is the
    prefix [0, risk_end[i]), which turns all risk-set sums into cumulative
    sums and keeps every evaluation O(n) per column.
    """
    resp = d.dataset.response
    order = np.argsort(-resp.time, kind="stable")
    t_sorted = resp.time[order]
    events = resp.status[order] == 1.0
    # number of observations with time >= t_sorted[i] (ties included)
    risk_end = np.searchsorted(-t_sorted, -t_sorted, side="right")
    return order, events, risk_end


def _cox_log_risk(eta_sorted: np.ndarray, risk_end: np.ndarray):
    """log of risk-set sums of exp(eta), shift-stabilized, plus the weights."""
    shift = eta_sorted.max()
    w = np.exp(eta_sorted - shift)
    cw = np.cumsum(w)
    log_risk = shift + np.log(cw[risk_end - 1])
    return log_risk, w, cw


def loss(family: ModelFamily, d: StandardizedDataset, m: CoefficientModel) -> float:
    """Family loss at the given coefficients.

    gaussian: |y - X b|^2 / (2n); binomial: negative log-likelihood with
    intercept; cox: negative partial likelihood summed over events.
    """
    _check_family(family, d)
    X = d.dataset.X
    if family.tag == "gaussian":
        e = d.dataset.response.y - X @ m.beta
        return float(e @ e) / (2.0 * d.dataset.n)
    if family.tag == "binomial":
        eta = m.intercept + X @ m.beta
        y = d.dataset.response.y
        # log(1 + exp(eta)) via logaddexp to dodge overflow
        return float(np.sum(np.logaddexp(0.0, eta) - y * eta))
    order, events, risk_end = _cox_sorted(d)
    eta_sorted = (X @ m.beta)[order]
    log_risk, _, _ = _cox_log_risk(eta_sorted, risk_end)
    return float(np.sum(log_risk[events] - eta_sorted[events]))


def grad_hess(family: ModelFamily, d: StandardizedDataset, m: CoefficientModel):
    """Coordinate gradient g_j and curvature h_j for every j at once.

    These are the per-coordinate first and second derivatives of the loss
    with all other coordinates (and the binomial intercept) held fixed.
    """
    _check_family(family, d)
    X = d.dataset.X
    n = d.dataset.n
    if family.tag == "gaussian":
        e = d.dataset.response.y - X @ m.beta
        g = -(X.T @ e) / n
        return g, np.ones(d.dataset.p)
    if family.tag == "binomial":
        eta = m.intercept + X @ m.beta
        prob = _sigmoid(eta)
        y = d.dataset.response.y
        g = X.T @ (prob - y)
        h = (X**2).T @ (prob * (1.0 - prob))
        return g, h
    order, events, risk_end = _cox_sorted(d)
    Xs = X[order]
    eta_sorted = (X @ m.beta)[order]
    _, w, cw = _cox_log_risk(eta_sorted, risk_end)
    cwx = np.cumsum(w[:, None] * Xs, axis=0)
    cwx2 = np.cumsum(w[:, None] * Xs**2, axis=0)
    idx = risk_end[events] - 1
    denom = cw[idx][:, None]
    xbar = cwx[idx] / denom
    g = -(Xs[events] - xbar).sum(axis=0)
    h = (cwx2[idx] / denom - xbar**2).sum(axis=0)
    # exact h is nonnegative; clear roundoff dust
    np.maximum(h, 0.0, out=h)
    return g, h


def dual_sacrifice(family: ModelFamily, d: StandardizedDataset, m: CoefficientModel):
    """Dual variables and sacrifices at an active-set minimizer.

    Active coordinates have zero dual and sacrifice h_j b_j^2 / 2; inactive
    coordinates get the Newton step gamma_j = -g_j / h_j from zero and
    sacrifice h_j gamma_j^2 / 2.  Curvature is floored before the division
    so that flat coordinates cannot produce infinities.
    """
    g, h = grad_hess(family, d, m)
    active = np.zeros(d.dataset.p, dtype=bool)
    if m.active_set:
        active[list(m.active_set)] = True
    h_safe = np.maximum(h, CURVATURE_FLOOR)
    gamma = np.where(active, 0.0, -g / h_safe)
    delta = np.where(active, 0.5 * h * m.beta**2, 0.5 * h_safe * gamma**2)
    return gamma, delta


def _solve_spd(A: np.ndarray, rhs: np.ndarray, context: str) -> np.ndarray:
    """Cholesky solve with a ridge fallback for (numerically) singular systems.

    A factor whose pivot ratio collapses signals rank deficiency even when
    the factorization itself squeaks through, so both cases take the ridge
    path.
    """
    try:
        factor = cho_factor(A)
        pivots = np.abs(np.diag(factor[0]))
        if pivots.min() > 1e-7 * max(pivots.max(), 1e-300):
            return cho_solve(factor, rhs)
    except LinAlgError:
        pass
    k = A.shape[0]
    ridge = RIDGE_JITTER * max(np.trace(A), 1.0) / max(k, 1)
    warnings.warn(
        f"singular {context} system; adding ridge {ridge:.3e}", RuntimeWarning
    )
    return np.linalg.solve(A + ridge * np.eye(k), rhs)


def _fit_gaussian(family, d, active):
    X = d.dataset.X
    y = d.dataset.response.y
    beta = np.zeros(d.dataset.p)
    if active:
        cols = list(active)
        XA = X[:, cols]
        beta[cols] = _solve_spd(XA.T @ XA, XA.T @ y, "least-squares")
    return CoefficientModel(beta, 0.0, active, True, 1)


def _fit_binomial(family, d, active):
    X = d.dataset.X
    y = d.dataset.response.y
    n = d.dataset.n
    Z = np.column_stack([np.ones(n)] + ([X[:, list(active)]] if active else []))
    coef = np.zeros(Z.shape[1])

    def nll(c):
        eta = Z @ c
        return float(np.sum(np.logaddexp(0.0, eta) - y * eta))

    current = nll(coef)
    converged = False
    iterations = 0
    for iterations in range(1, family.irls_max_iter + 1):
        eta = Z @ coef
        prob = _sigmoid(eta)
        score = Z.T @ (prob - y)
        if np.max(np.abs(score)) < family.solver_tol:
            converged = True
            break
        w = np.maximum(prob * (1.0 - prob), IRLS_WEIGHT_FLOOR)
        H = Z.T @ (Z * w[:, None])
        step = _solve_spd(H, score, "IRLS")
        # damped Newton: halve until the objective stops increasing
        scale = 1.0
        for _ in range(40):
            trial = coef - scale * step
            value = nll(trial)
            if value <= current + 1e-12:
                break
            scale *= 0.5
        coef, current = trial, value
        if np.max(np.abs(scale * step)) < family.solver_tol:
            converged = True
            break
    beta = np.zeros(d.dataset.p)
    if active:
        beta[list(active)] = coef[1:]
    return CoefficientModel(beta, float(coef[0]), active, converged, iterations)


def _fit_cox(family, d, active):
    X = d.dataset.X
    if not active:
        return CoefficientModel(np.zeros(d.dataset.p), 0.0, active, True, 0)
    order, events, risk_end = _cox_sorted(d)
    XA = X[:, list(active)][order]
    k = len(active)
    coef = np.zeros(k)

    def npl(c):
        eta = XA @ c
        log_risk, _, _ = _cox_log_risk(eta, risk_end)
        return float(np.sum(log_risk[events] - eta[events]))

    current = npl(coef)
    converged = False
    iterations = 0
    for iterations in range(1, family.newton_max_iter + 1):
        eta = XA @ coef
        _, w, cw = _cox_log_risk(eta, risk_end)
        idx = risk_end[events] - 1
        denom = cw[idx]
        cwx = np.cumsum(w[:, None] * XA, axis=0)
        xbar = cwx[idx] / denom[:, None]
        score = -(XA[events] - xbar).sum(axis=0)
        if np.max(np.abs(score)) < family.solver_tol:
            converged = True
            break
        if family.diagonal_hessian:
            cwx2 = np.cumsum(w[:, None] * XA**2, axis=0)
            hdiag = (cwx2[idx] / denom[:, None] - xbar**2).sum(axis=0)
            step = score / np.maximum(hdiag, CURVATURE_FLOOR)
        else:
            outer = np.cumsum(w[:, None, None] * XA[:, :, None] * XA[:, None, :], axis=0)
            H = (outer[idx] / denom[:, None, None]).sum(axis=0)
            H -= np.einsum("ij,il->jl", xbar, xbar)
            step = _solve_spd(H, score, "Newton")
        scale = 1.0
        for _ in range(40):
            trial = coef - scale * step
            value = npl(trial)
            if value <= current + 1e-12:
                break
            scale *= 0.5
        coef, current = trial, value
        if np.max(np.abs(scale * step)) < family.solver_tol:
            converged = True
            break
    beta = np.zeros(d.dataset.p)
    beta[list(active)] = coef
    return CoefficientModel(beta, 0.0, active, converged, iterations)


def fit_active(
    family: ModelFamily, d: StandardizedDataset, active_set
) -> CoefficientModel:
    """Minimize the family loss with all coordinates off ``active_set`` at zero.

    Hitting an iteration cap yields a result flagged non-converged rather
    than an error, so callers inside the active-set iteration can proceed.
    """
    _check_family(family, d)
    requested = tuple(int(j) for j in active_set)
    active = tuple(sorted(set(requested)))
    if len(active) != len(requested):
        raise ValueError("active_set contains duplicate indices")
    if active and (active[0] < 0 or active[-1] >= d.dataset.p):
        raise ValueError("active_set index out of range")
    if family.tag == "gaussian" and len(active) > d.dataset.n:
        raise ValueError(
            f"active set size {len(active)} exceeds n={d.dataset.n} "
            "for the gaussian family"
        )
    if family.tag == "gaussian":
        return _fit_gaussian(family, d, active)
    if family.tag == "binomial":
        return _fit_binomial(family, d, active)
    return _fit_cox(family, d, active)


def predict(
    family: ModelFamily,
    m: CoefficientModel,
    Xnew: np.ndarray,
    meta: StandardizedDataset,
) -> np.ndarray:
    """Predict on original-scale rows: fitted values, probabilities, or risks."""
    Xnew = np.asarray(Xnew, dtype=float)
    if Xnew.ndim != 2 or Xnew.shape[1] != meta.dataset.p:
        raise ValueError(
            f"Xnew must have {meta.dataset.p} columns, got {Xnew.shape}"
        )
    Xs = (Xnew - meta.column_centers) / meta.column_scales
    eta = Xs @ m.beta
    if family.tag == "gaussian":
        return meta.response_center + eta
    if family.tag == "binomial":
        return _sigmoid(m.intercept + eta)
    return np.exp(eta)


def log_likelihood(
    family: ModelFamily, d: StandardizedDataset, m: CoefficientModel
) -> float:
    """Log-likelihood used by the information criteria.

    The gaussian value is the profile log-likelihood without its additive
    constant, -(n/2) log(RSS/n); binomial and cox return the (partial)
    log-likelihood, i.e. the negated loss.
    """
    if family.tag == "gaussian":
        n = d.dataset.n
        rss = 2.0 * n * loss(family, d, m)
        return -0.5 * n * math.log(max(rss, 1e-300) / n)
    return -loss(family, d, m)
