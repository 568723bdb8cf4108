"""Exhaustive best-subset search, the ground truth for small p.

Enumerates every size-k subset in lexicographic order and keeps the first
one attaining the minimal active-set loss, so ties resolve deterministically.
Only intended for desk-scale problems; the subset count explodes beyond
``p_cap``.
"""

from itertools import combinations

from .data import StandardizedDataset
from .families import ModelFamily, fit_active, loss

DEFAULT_P_CAP = 25


def exhaustive_best_subset(
    family: ModelFamily,
    d: StandardizedDataset,
    k: int,
    p_cap: int = DEFAULT_P_CAP,
):
    """Globally best size-k subset by enumeration; returns (active_set, loss)."""
    p = d.dataset.p
    if p > p_cap:
        raise ValueError(
            f"refusing exhaustive search: p={p} exceeds p_cap={p_cap}"
        )
    if not 0 <= k <= p:
        raise ValueError(f"k must be in [0, {p}], got {k}")
    best_set = None
    best_loss = None
    for subset in combinations(range(p), k):
        value = loss(family, d, fit_active(family, d, subset))
        if best_loss is None or value < best_loss:
            best_set, best_loss = subset, value
    return best_set, float(best_loss)
