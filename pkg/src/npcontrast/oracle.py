"""Exhaustive-enumeration verification oracle.

Independent of the closed-form NPC paths: every assignment of the supported
levels to classes is scored as an accuracy rate and the maximum is returned.
Only feasible for tiny instances; exists so the closed forms can be checked
against something that cannot share their bugs.
"""

from __future__ import annotations

import numpy as np

from .domain import DiscreteDistribution, require_shared_domain
from .errors import InstanceTooLargeError, TooFewClassesError

# Largest number of assignments we are willing to enumerate: covers up to 12
# supported levels for two classes and 8 for three.
MAX_ASSIGNMENTS = 3**8


def brute_force_npc_oracle(dists, n_classes: int | None = None) -> float:
    """Maximum of 1 - sum(e_i)/(n-1) over every assignment of supported
    levels to the n classes."""
    dists = list(dists)
    require_shared_domain(dists)
    n = len(dists)
    if n < 2:
        raise TooFewClassesError("the oracle needs at least two classes")
    if n_classes is not None and n_classes != n:
        raise ValueError("n_classes disagrees with the number of distributions")

    counts = np.stack([d.counts for d in dists])
    support = np.flatnonzero((counts > 0).any(axis=0))
    n_levels = int(support.size)
    if n**n_levels > MAX_ASSIGNMENTS:
        raise InstanceTooLargeError(
            f"{n}^{n_levels} assignments exceed the enumeration bound of {MAX_ASSIGNMENTS}"
        )

    masses = counts[:, support] / np.array([[d.total] for d in dists], dtype=np.float64)
    # Rows of `assignments` are every function {supported levels} -> {classes}.
    assignments = np.indices((n,) * n_levels).reshape(n_levels, -1).T
    kept_mass = masses[assignments, np.arange(n_levels)].sum(axis=1)
    scores = 1.0 - (n - kept_mass) / (n - 1)
    return float(scores.max())
