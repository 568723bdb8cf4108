"""Primal-dual active set iteration for a fixed cardinality k.

Starting from some size-k active set, each sweep (i) fits the coefficients
restricted to the current set, (ii) computes duals and sacrifices for every
coordinate, and (iii) replaces the set with the k coordinates of largest
sacrifice.  A set that reproduces itself is a fixed point and the iteration
stops.  On weak signals the sweep can enter a short cycle instead, so every
visited set is remembered and any revisit stops the run, returning the
visited state of lowest loss.
"""

from dataclasses import dataclass

import numpy as np

from .data import StandardizedDataset
from .families import CoefficientModel, ModelFamily, dual_sacrifice, fit_active, loss

DEFAULT_MAX_SWEEPS = 20


@dataclass(frozen=True, eq=False)
class PrimalDualState:
    """Primal beta, dual gamma, sacrifice delta, and the set partition at one k.

    The primal and dual supports are complementary by construction: beta
    vanishes off the active set, gamma vanishes on it.
    """

    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    active_set: tuple[int, ...]
    inactive_set: tuple[int, ...]
    k: int
    loss: float
    model: CoefficientModel

    def __post_init__(self):
        p = self.beta.shape[0]
        active = set(self.active_set)
        partitioned = (
            len(self.active_set) == self.k
            and len(self.active_set) + len(self.inactive_set) == p
            and active | set(self.inactive_set) == set(range(p))
        )
        if not partitioned:
            raise ValueError("active and inactive sets must partition the indices")
        if any(self.beta[j] != 0.0 for j in self.inactive_set):
            raise ValueError("beta must vanish on the inactive set")
        if any(self.gamma[j] != 0.0 for j in self.active_set):
            raise ValueError("gamma must vanish on the active set")


@dataclass(frozen=True, eq=False)
class PdasOutput:
    state: PrimalDualState
    iterations: int
    converged: bool
    history: tuple[tuple[int, ...], ...]

    @property
    def loss(self) -> float:
        return self.state.loss

    @property
    def k(self) -> int:
        return self.state.k


def select_top_k(delta: np.ndarray, k: int) -> tuple[int, ...]:
    """Indices of the k largest sacrifices; ties break toward lower indices."""
    delta = np.asarray(delta)
    if k > delta.shape[0]:
        raise ValueError("k exceeds the number of coordinates")
    if k == 0:
        return ()
    order = np.argsort(-delta, kind="stable")
    return tuple(sorted(int(j) for j in order[:k]))


def random_subset(p: int, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    """A uniformly random size-k subset of {0..p-1}, usable as a pdas init."""
    return tuple(sorted(int(j) for j in rng.choice(p, size=k, replace=False)))


def _evaluate(family, d, active):
    model = fit_active(family, d, active)
    gamma, delta = dual_sacrifice(family, d, model)
    inactive = tuple(j for j in range(d.dataset.p) if j not in set(active))
    return PrimalDualState(
        beta=model.beta,
        gamma=gamma,
        delta=delta,
        active_set=model.active_set,
        inactive_set=inactive,
        k=len(model.active_set),
        loss=loss(family, d, model),
        model=model,
    )


def null_fit(family: ModelFamily, d: StandardizedDataset) -> PdasOutput:
    """The empty-model state (k = 0); anchors warm starts and k-0 criteria."""
    state = _evaluate(family, d, ())
    return PdasOutput(state=state, iterations=0, converged=True, history=((),))


def _sized_init(family, d, init, k) -> tuple[int, ...]:
    """Coerce an initial set to size k.

    Too-small inits are padded with the coordinates of largest sacrifice at
    the empty model; too-large inits are fitted once and trimmed to the k
    largest |beta|.
    """
    init = tuple(sorted(set(int(j) for j in init)))
    if init and (init[0] < 0 or init[-1] >= d.dataset.p):
        raise ValueError("init index out of range")
    if len(init) == k:
        return init
    if len(init) < k:
        _, delta0 = dual_sacrifice(family, d, fit_active(family, d, ()))
        order = np.argsort(-delta0, kind="stable")
        chosen = set(init)
        for j in order:
            if len(chosen) == k:
                break
            chosen.add(int(j))
        return tuple(sorted(chosen))
    model = fit_active(family, d, init)
    order = np.argsort(-np.abs(model.beta[list(init)]), kind="stable")
    return tuple(sorted(init[j] for j in order[:k]))


def pdas(
    family: ModelFamily,
    d: StandardizedDataset,
    k: int,
    init=None,
    m_max: int = DEFAULT_MAX_SWEEPS,
) -> PdasOutput:
    """Run the active-set fixed-point iteration at cardinality k.

    ``init`` is an optional starting index set (resized as needed); when
    omitted the k largest empty-model sacrifices are used.  ``converged``
    is True only when an active set reproduced itself; hitting a cycle or
    ``m_max`` returns the best visited state with the flag down.
    """
    p = d.dataset.p
    n = d.dataset.n
    if not 1 <= k <= p:
        raise ValueError(f"k must be in [1, {p}], got {k}")
    if family.tag == "gaussian" and k > n:
        raise ValueError(f"k={k} exceeds n={n} for the gaussian family")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")

    if init is None:
        _, delta0 = dual_sacrifice(family, d, fit_active(family, d, ()))
        active = select_top_k(delta0, k)
    else:
        active = _sized_init(family, d, init, k)

    visited: dict[tuple[int, ...], PrimalDualState] = {}
    history: list[tuple[int, ...]] = []
    iterations = 0
    state = None
    for _ in range(m_max):
        state = _evaluate(family, d, active)
        iterations += 1
        history.append(active)
        visited[active] = state
        proposal = select_top_k(state.delta, k)
        if proposal == active:
            return PdasOutput(state, iterations, True, tuple(history))
        if proposal in visited:
            break
        active = proposal
    best = min(visited.values(), key=lambda s: (s.loss, s.active_set))
    return PdasOutput(best, iterations, False, tuple(history))
