"""Choosing the subset size: sequential sweep and golden-section elbow search.

The sequential search runs the active-set solver for k = 1..k_max, warm
starting each size from the previous solution, and picks the k minimizing an
information criterion (AIC, BIC, or EBIC).  The golden-section search
instead brackets the `elbow' of the loss-versus-k curve, probing a few
sizes per iteration, which needs only O(log k_max) solver calls.
"""

import math
from dataclasses import dataclass

import numpy as np

from .data import StandardizedDataset
from .families import ModelFamily, log_likelihood
from .pdas import DEFAULT_MAX_SWEEPS, PdasOutput, null_fit, pdas, select_top_k

CRITERIA = ("aic", "bic", "ebic")
LOSS_FLOOR = 1e-8
GOLDEN_RATIO = 0.618


@dataclass(frozen=True)
class CriterionValues:
    """Deviance and the penalized criteria at one subset size."""

    deviance: float
    aic: float
    bic: float
    ebic: float
    k: int
    n: int
    p: int

    def value(self, criterion: str) -> float:
        return getattr(self, criterion)


def criteria(loglik: float, k: int, n: int, p: int) -> CriterionValues:
    """Information criteria from a log-likelihood and model size.

    deviance = -2 loglik, aic = deviance + 2k, bic = deviance + k log n,
    ebic = bic + 2k log p.
    """
    if n < 2 or p < 1 or k < 0:
        raise ValueError("need n >= 2, p >= 1, k >= 0")
    deviance = -2.0 * loglik
    aic = deviance + 2.0 * k
    bic = deviance + k * math.log(n)
    ebic = bic + 2.0 * k * math.log(p)
    return CriterionValues(deviance, aic, bic, ebic, k, n, p)


def resolve_criterion(criterion: str, n: int, p: int) -> str:
    """``auto`` maps to AIC for n >= p and to EBIC for n < p."""
    if criterion == "auto":
        return "aic" if n >= p else "ebic"
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    return criterion


def default_k_max(family: ModelFamily, n: int, p: int) -> int:
    """Family-specific cap on candidate subset sizes."""
    if family.tag == "gaussian":
        cap = min(n / 2, p)
    else:
        cap = min(n / math.log(n), p)
    return max(1, int(cap))


@dataclass(frozen=True, eq=False)
class PathEntry:
    """One record of the solution path at subset size k."""

    k: int
    active_set: tuple[int, ...]
    beta: np.ndarray
    intercept: float
    loss: float
    criteria: CriterionValues
    pdas_iterations: int
    pdas_converged: bool
    solver_converged: bool


@dataclass(frozen=True, eq=False)
class FitPath:
    """Solution path over k, plus the best size under each criterion."""

    entries: tuple[PathEntry, ...]
    best_by: dict[str, int]

    def entry_for(self, k: int) -> PathEntry:
        for entry in self.entries:
            if entry.k == k:
                return entry
        raise KeyError(f"no path entry for k={k}")


@dataclass(frozen=True, eq=False)
class SelectionReport:
    """The selected model with its diagnostics."""

    family: str
    method: str
    k: int
    active_set: tuple[int, ...]
    beta: np.ndarray
    intercept: float
    loss: float
    loglik: float
    criteria: CriterionValues
    criterion: str
    pdas_iterations: int
    pdas_converged: bool
    solver_converged: bool


def warm_start_set(prev: PdasOutput, new_k: int) -> tuple[int, ...]:
    """Grow the previous active set with the top inactive sacrifices.

    The previous set is kept whole and the (new_k - k_prev) inactive
    coordinates of largest sacrifice are appended; ties go to lower indices.
    """
    prev_active = prev.state.active_set
    if new_k < len(prev_active):
        raise ValueError("new_k must be at least the previous active set size")
    if new_k == len(prev_active):
        return prev_active
    delta = np.asarray(prev.state.delta, dtype=float).copy()
    delta[list(prev_active)] = np.inf  # keep previous members on top
    return select_top_k(delta, new_k)


def _entry_from(family, d, out: PdasOutput, k: int) -> PathEntry:
    model = out.state.model
    crit = criteria(log_likelihood(family, d, model), k, d.dataset.n, d.dataset.p)
    return PathEntry(
        k=k,
        active_set=out.state.active_set,
        beta=out.state.beta,
        intercept=model.intercept,
        loss=out.state.loss,
        criteria=crit,
        pdas_iterations=out.iterations,
        pdas_converged=out.converged,
        solver_converged=model.solver_converged,
    )


def _report_from(family, d, entry: PathEntry, method: str, criterion: str):
    return SelectionReport(
        family=family.tag,
        method=method,
        k=entry.k,
        active_set=entry.active_set,
        beta=entry.beta,
        intercept=entry.intercept,
        loss=entry.loss,
        loglik=-0.5 * entry.criteria.deviance,
        criteria=entry.criteria,
        criterion=criterion,
        pdas_iterations=entry.pdas_iterations,
        pdas_converged=entry.pdas_converged,
        solver_converged=entry.solver_converged,
    )


def spdas(
    family: ModelFamily,
    d: StandardizedDataset,
    k_max: int | None = None,
    criterion: str = "auto",
    epsilon: float = 0.0,
    m_max: int = DEFAULT_MAX_SWEEPS,
):
    """Sequential sweep over k = 1..k_max with warm starts.

    Returns ``(path, report)``.  The path always contains the k = 0 null
    model so the criteria may select the empty set.  With ``epsilon > 0``
    the sweep stops early once the relative loss improvement of a step
    falls below it.
    """
    n, p = d.dataset.n, d.dataset.p
    if k_max is None:
        k_max = default_k_max(family, n, p)
    cap = min(n, p) if family.tag == "gaussian" else p
    if not 1 <= k_max <= cap:
        raise ValueError(f"k_max must be in [1, {cap}], got {k_max}")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    chosen = resolve_criterion(criterion, n, p)

    prev = null_fit(family, d)
    entries = [_entry_from(family, d, prev, 0)]
    for k in range(1, k_max + 1):
        out = pdas(family, d, k, init=warm_start_set(prev, k), m_max=m_max)
        entries.append(_entry_from(family, d, out, k))
        if epsilon > 0.0:
            prev_loss = entries[-2].loss
            gain = (prev_loss - out.state.loss) / max(abs(prev_loss), 1e-10)
            if gain < epsilon:
                break
        prev = out

    best_by = {
        name: min(entries, key=lambda e: (e.criteria.value(name), e.k)).k
        for name in CRITERIA
    }
    path = FitPath(tuple(entries), best_by)
    report = _report_from(family, d, path.entry_for(best_by[chosen]), "sequential", chosen)
    return path, report


@dataclass(frozen=True)
class GoldenSectionTrace:
    """Per-iteration interval log of the elbow search."""

    rows: tuple[tuple[int, int, int, int], ...]  # (iteration, k_left, k_split, k_right)
    terminal_k: int
    reason: str  # elbow | interval-collapse | max-iter
    pdas_calls: int

    def lines(self) -> list[str]:
        return [
            f"{i}-th iteration s.left:{kl} s.split:{km} s.right:{kr}"
            for i, kl, km, kr in self.rows
        ]


def split_point(k_left: int, k_right: int) -> int:
    """Golden-ratio interior point, rounded half-up to an integer."""
    return int(math.floor(k_left + GOLDEN_RATIO * (k_right - k_left) + 0.5))


def golden_section_search(run, k_max: int, eta: float, m_max: int):
    """Drive the elbow search over an abstract solver.

    ``run(k, prev)`` must fit size k, warm started from the previous output
    ``prev`` (or None), and return an object with a ``loss`` attribute.
    Returns ``(output, rows, reason, calls)``.

    Each iteration solves at the interval ends and the golden split k_M,
    then probes k_M +- 1: a drop into k_M that is large relative to the
    loss there, followed by a flat step beyond it, certifies an elbow.
    Otherwise the interval shrinks toward wherever the loss still moves.
    """
    if k_max < 3:
        raise ValueError("k_max must be >= 3")
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must be in (0, 1)")
    calls = 0

    def solve(k, prev):
        nonlocal calls
        calls += 1
        return run(k, prev)

    k_left, k_right = 1, k_max
    prev_left = prev_right = prev_mid = None
    out_mid = None
    rows = []
    reason = "max-iter"
    for m in range(1, m_max + 1):
        out_left = solve(k_left, prev_left)
        out_right = solve(k_right, prev_right)
        k_mid = split_point(k_left, k_right)
        out_mid = solve(k_mid, prev_mid)
        rows.append((m, k_left, k_mid, k_right))

        loss_mid = out_mid.loss
        tol = eta * max(abs(loss_mid), LOSS_FLOOR)
        drop_in = False
        if k_mid - 1 >= 1:
            below = solve(k_mid - 1, out_mid)
            drop_in = abs(loss_mid - below.loss) > tol
        flat_out = False
        if k_mid + 1 <= k_max:
            above = solve(k_mid + 1, out_mid)
            flat_out = abs(loss_mid - above.loss) < tol / 2.0
        if drop_in and flat_out:
            reason = "elbow"
            break

        gap_left = abs(loss_mid - out_left.loss)
        gap_right = abs(out_right.loss - loss_mid)
        if gap_left > tol > gap_right:
            k_right, prev_right = k_mid, out_mid
        elif min(gap_left, gap_right) > tol:
            k_left, prev_left = k_mid, out_mid
        else:
            k_right, prev_right = k_mid, out_mid
            k_left, prev_left = 1, None
        prev_mid = out_mid
        if k_left == k_right - 1:
            reason = "interval-collapse"
            break
    return out_mid, tuple(rows), reason, calls


def gpdas(
    family: ModelFamily,
    d: StandardizedDataset,
    k_max: int | None = None,
    eta: float = 0.01,
    m_max: int = 100,
    pdas_m_max: int = DEFAULT_MAX_SWEEPS,
):
    """Golden-section elbow search over the subset size.

    Returns ``(report, trace)``.  Solver outputs at each interval endpoint
    warm start the corresponding run of the next iteration.
    """
    n, p = d.dataset.n, d.dataset.p
    if k_max is None:
        k_max = default_k_max(family, n, p)

    def run(k, prev):
        if prev is None:
            init = None
        elif k >= prev.k:
            init = warm_start_set(prev, k)
        else:
            init = prev.state.active_set
        return pdas(family, d, k, init=init, m_max=pdas_m_max)

    out, rows, reason, calls = golden_section_search(run, k_max, eta, m_max)
    trace = GoldenSectionTrace(rows, out.k, reason, calls)
    entry = _entry_from(family, d, out, out.k)
    report = _report_from(family, d, entry, "gsection", "loss-elbow")
    return report, trace
