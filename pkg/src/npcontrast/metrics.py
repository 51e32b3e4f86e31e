"""Two-class and multi-class normalized potential contrast.

Normalized potential contrast (NPC) is the maximal mean difference between
two labeled pixel classes achievable by a binary transform of the image
values; it equals the total variation distance between the two class
histograms. The multi-class generalization scores how separable n class
histograms are under the induced argmax segmentation.

Four interchangeable compute paths are provided and cross-checkable:

``definitional``
    build the optimal value-to-class LUT, apply it, and take the difference
    of class means (multi-class: one minus the scaled sum of per-class
    error rates).
``min_form``
    one minus the overlapping (misrouted) probability mass.
``max_form``
    the summed per-level maximum mass, rescaled to [0, 1].
``histogram_l1``
    half the l1 distance between the histograms (multi-class: the mean of
    sorted per-level mass differences).

All arithmetic is exact: counts are integers and each path reduces to the
same rational number, so the paths return bit-identical floats.
"""

from __future__ import annotations

from collections.abc import Mapping
from fractions import Fraction

import numpy as np

from .domain import (
    COMPUTE_PATHS,
    TIE_BREAKS,
    TIE_LOWEST,
    UNSEEN_UNASSIGNED,
    ClassSamples,
    ClassifierLUT,
    ContrastReport,
    DiscreteDistribution,
    ValueDomain,
    require_shared_domain,
)
from .errors import (
    DomainMismatchError,
    NonInjectiveMapError,
    PathDisagreementError,
    TooFewClassesError,
    UncoveredLevelError,
)

__all__ = [
    "build_distribution",
    "npc_two_class",
    "pc_two_class",
    "optimal_binarization",
    "npc_multi_class",
    "pc_multi_class",
    "optimal_segmentation_lut",
    "error_rates",
    "pairwise_npc",
    "apply_injective_remap",
    "npc_mean_difference_form",
    "compute_contrast_report",
]

CROSS_CHECK_TOL = 1e-12

# Cross-multiplied mass comparisons need products of two totals; beyond this
# bound the computation falls back to arbitrary-precision Python integers.
_INT64_SAFE_TOTAL = 2**31


def build_distribution(samples: ClassSamples, domain: ValueDomain) -> DiscreteDistribution:
    """Count the samples of one class into a normalized histogram over the
    domain's levels.

    Raises EmptyClassError for zero samples (at ClassSamples construction)
    and ValueOutsideDomainError if a sample is not exactly a domain level.
    """
    idx = domain.index_of(samples.values)
    counts = np.bincount(idx, minlength=domain.size).astype(np.int64)
    return DiscreteDistribution(domain, counts, samples.count)


def _counts_matrix(dists: list[DiscreteDistribution]) -> tuple[np.ndarray, list[int]]:
    totals = [d.total for d in dists]
    stacked = np.stack([d.counts for d in dists])
    if max(totals) > _INT64_SAFE_TOTAL:
        stacked = stacked.astype(object)
    return stacked, totals


def _support_union_indices(C: np.ndarray) -> np.ndarray:
    return np.flatnonzero((C > 0).any(axis=0))


def _argmax_winners(C: np.ndarray, totals: list[int], tie_break: str) -> np.ndarray:
    """Exact per-level argmax of counts[i]/totals[i], 0-based class indices.

    Ties go to the lowest index unless tie_break is "highest".
    """
    n, length = C.shape
    win = np.zeros(length, dtype=np.int64)
    best_c = C[0].copy()
    best_t = np.full(length, totals[0], dtype=C.dtype)
    take_on_tie = tie_break != TIE_LOWEST
    for i in range(1, n):
        lhs = C[i] * best_t
        rhs = best_c * totals[i]
        better = (lhs >= rhs) if take_on_tie else (lhs > rhs)
        win[better] = i
        best_c[better] = C[i][better]
        best_t[better] = totals[i]
    return win


def _winner_mass_sum(C: np.ndarray, totals: list[int], win: np.ndarray) -> Fraction:
    """Sum over levels of the winning class's mass, as an exact rational."""
    total = Fraction(0)
    for i, t in enumerate(totals):
        picked = int(C[i][win == i].sum())
        if picked:
            total += Fraction(picked, t)
    return total


def _check_path(path: str) -> None:
    if path not in COMPUTE_PATHS and path != "all":
        raise ValueError(f"unknown compute path {path!r}")


# ---------------------------------------------------------------------------
# Two-class NPC
# ---------------------------------------------------------------------------

def _npc2_definitional(pa: DiscreteDistribution, pb: DiscreteDistribution) -> Fraction:
    # Apply the optimal binarization, then take the difference of class means.
    lut = optimal_binarization(pa, pb)
    idx = pa.domain.index_of(lut.levels)
    to_one = idx[lut.classes == 1]
    mean_a = Fraction(int(pa.counts[to_one].sum()), pa.total)
    mean_b = Fraction(int(pb.counts[to_one].sum()), pb.total)
    return mean_a - mean_b


def _npc2_min_form(pa: DiscreteDistribution, pb: DiscreteDistribution) -> Fraction:
    ca, cb = _counts_matrix([pa, pb])[0]
    a_is_min = ca * pb.total <= cb * pa.total
    overlap = Fraction(int(ca[a_is_min].sum()), pa.total) + Fraction(
        int(cb[~a_is_min].sum()), pb.total
    )
    return 1 - overlap


def _npc2_max_form(pa: DiscreteDistribution, pb: DiscreteDistribution) -> Fraction:
    ca, cb = _counts_matrix([pa, pb])[0]
    a_is_max = ca * pb.total >= cb * pa.total
    peak = Fraction(int(ca[a_is_max].sum()), pa.total) + Fraction(
        int(cb[~a_is_max].sum()), pb.total
    )
    return peak - 1


def _npc2_histogram_l1(pa: DiscreteDistribution, pb: DiscreteDistribution) -> Fraction:
    ca, cb = _counts_matrix([pa, pb])[0]
    diff = ca * pb.total - cb * pa.total
    # |sum| is bounded by 2 * total_a * total_b, so the int64 path cannot wrap.
    numer = int(np.abs(diff).sum()) if diff.dtype != object else sum(abs(v) for v in diff)
    return Fraction(numer, 2 * pa.total * pb.total)


_TWO_CLASS_PATHS = {
    "definitional": _npc2_definitional,
    "min_form": _npc2_min_form,
    "max_form": _npc2_max_form,
    "histogram_l1": _npc2_histogram_l1,
}


def npc_two_class(
    pa: DiscreteDistribution,
    pb: DiscreteDistribution,
    path: str = "histogram_l1",
) -> float:
    """Normalized potential contrast between two class distributions.

    ``path`` selects the compute route; ``"all"`` evaluates every route,
    raising PathDisagreementError if the spread exceeds 1e-12.
    """
    _check_path(path)
    require_shared_domain([pa, pb])
    if path == "all":
        values = {name: float(fn(pa, pb)) for name, fn in _TWO_CLASS_PATHS.items()}
        return _cross_checked(values)
    return float(_TWO_CLASS_PATHS[path](pa, pb))


def pc_two_class(
    pa: DiscreteDistribution,
    pb: DiscreteDistribution,
    domain: ValueDomain | None = None,
    path: str = "histogram_l1",
) -> float:
    """Potential contrast: NPC scaled to the domain's nominal range."""
    shared = require_shared_domain([pa, pb])
    if domain is not None and domain != shared:
        raise DomainMismatchError("explicit domain differs from the distributions' domain")
    return shared.nominal_range * npc_two_class(pa, pb, path)


def optimal_binarization(
    pa: DiscreteDistribution,
    pb: DiscreteDistribution,
    unseen_policy: str = UNSEEN_UNASSIGNED,
) -> ClassifierLUT:
    """The contrast-maximizing binary rule: class 1 (foreground) wherever
    P_A is at least P_B, class 2 otherwise, over the union of supports."""
    domain = require_shared_domain([pa, pb])
    C, totals = _counts_matrix([pa, pb])
    support = _support_union_indices(C)
    ca, cb = C[0][support], C[1][support]
    a_wins = ca * totals[1] >= cb * totals[0]
    classes = np.where(a_wins, 1, 2)
    return ClassifierLUT(
        domain=domain,
        levels=domain.values[support],
        classes=classes,
        n_classes=2,
        unseen_policy=unseen_policy,
    )


# ---------------------------------------------------------------------------
# Multi-class NPC
# ---------------------------------------------------------------------------

def _prepared(dists) -> tuple[list[DiscreteDistribution], np.ndarray, list[int], int]:
    dists = list(dists)
    if len(dists) < 2:
        raise TooFewClassesError("at least two class distributions are required")
    require_shared_domain(dists)
    C, totals = _counts_matrix(dists)
    return dists, C, totals, len(dists)


def _npcn_max_form(dists) -> Fraction:
    _, C, totals, n = _prepared(dists)
    win = _argmax_winners(C, totals, TIE_LOWEST)
    return (_winner_mass_sum(C, totals, win) - 1) / (n - 1)


def _npcn_min_form(dists) -> Fraction:
    # Mass routed away from its own class: everything below the per-level max.
    _, C, totals, n = _prepared(dists)
    win = _argmax_winners(C, totals, TIE_LOWEST)
    lost = Fraction(0)
    for i, t in enumerate(totals):
        missed = int(C[i][win != i].sum())
        if missed:
            lost += Fraction(missed, t)
    return 1 - lost / (n - 1)


def _npcn_histogram_l1(dists) -> Fraction:
    # Per level, the sum of (max - P_i) over the n-1 non-maximal classes,
    # averaged with the 1/(n(n-1)) scaling.
    _, C, totals, n = _prepared(dists)
    win = _argmax_winners(C, totals, TIE_LOWEST)
    peak = _winner_mass_sum(C, totals, win)
    rest = Fraction(0)
    for i, t in enumerate(totals):
        rest += Fraction(int(C[i].sum()), t)
    return (n * peak - rest) / (n * (n - 1))


def _npcn_definitional(dists) -> Fraction:
    dists = list(dists)
    lut = optimal_segmentation_lut(dists)
    errs = _error_fractions(dists, lut)
    return 1 - sum(errs.values(), Fraction(0)) / (len(dists) - 1)


_MULTI_CLASS_PATHS = {
    "definitional": _npcn_definitional,
    "min_form": _npcn_min_form,
    "max_form": _npcn_max_form,
    "histogram_l1": _npcn_histogram_l1,
}


def npc_multi_class(dists, path: str = "histogram_l1") -> float:
    """Multi-class normalized potential contrast of n class distributions.

    Reduces exactly to the two-class value when n = 2.
    """
    _check_path(path)
    if path == "all":
        values = {name: float(fn(dists)) for name, fn in _MULTI_CLASS_PATHS.items()}
        return _cross_checked(values)
    return float(_MULTI_CLASS_PATHS[path](dists))


def npc_mean_difference_form(dists) -> float:
    """NPC as the mean, over levels, of the gap between the largest mass and
    the average of the remaining ones."""
    _, C, totals, n = _prepared(dists)
    win = _argmax_winners(C, totals, TIE_LOWEST)
    peak = _winner_mass_sum(C, totals, win)
    rest = Fraction(0)
    for i, t in enumerate(totals):
        rest += Fraction(int(C[i].sum()), t)
    rest -= peak
    return float((peak - rest / (n - 1)) / n)


def pc_multi_class(dists, domain: ValueDomain | None = None, path: str = "histogram_l1") -> float:
    shared = require_shared_domain(dists)
    if domain is not None and domain != shared:
        raise DomainMismatchError("explicit domain differs from the distributions' domain")
    return shared.nominal_range * npc_multi_class(dists, path)


def optimal_segmentation_lut(
    dists,
    tie_break: str = TIE_LOWEST,
    unseen_policy: str = UNSEEN_UNASSIGNED,
) -> ClassifierLUT:
    """Assign each supported level to a class with maximal mass there.

    The induced NPC value is the same for every tie-break rule; only the
    labels at exactly tied levels differ.
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"unknown tie break {tie_break!r}")
    dists, C, totals, n = _prepared(dists)
    domain = dists[0].domain
    support = _support_union_indices(C)
    win = _argmax_winners(C[:, support], totals, tie_break)
    return ClassifierLUT(
        domain=domain,
        levels=domain.values[support],
        classes=win + 1,
        n_classes=n,
        unseen_policy=unseen_policy,
    )


def _error_fractions(dists, lut: ClassifierLUT) -> dict[int, Fraction]:
    domain = require_shared_domain(dists)
    if domain != lut.domain:
        raise DomainMismatchError("LUT and distributions live on different domains")
    assigned_idx = domain.index_of(lut.levels) if lut.levels.size else np.array([], dtype=np.int64)
    covered = np.zeros(domain.size, dtype=bool)
    covered[assigned_idx] = True
    errs: dict[int, Fraction] = {}
    for i, dist in enumerate(dists):
        supported = dist.counts > 0
        if np.any(supported & ~covered):
            level = domain.values[supported & ~covered][0]
            raise UncoveredLevelError(
                f"level {level!r} carries mass but has no LUT assignment"
            )
        own = assigned_idx[lut.classes == i + 1]
        kept = int(dist.counts[own].sum())
        errs[i + 1] = Fraction(dist.total - kept, dist.total)
    return errs


def error_rates(dists, lut: ClassifierLUT) -> dict[int, float]:
    """Per-class misclassification rate of ``lut``: the probability mass of
    class i assigned to any other class."""
    return {cid: float(frac) for cid, frac in _error_fractions(dists, lut).items()}


def pairwise_npc(dists, path: str = "histogram_l1") -> np.ndarray:
    """Symmetric matrix of two-class NPC values over all class pairs."""
    dists = list(dists)
    if len(dists) < 2:
        raise TooFewClassesError("pairwise NPC needs at least two classes")
    require_shared_domain(dists)
    n = len(dists)
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            value = npc_two_class(dists[i], dists[j], path)
            out[i, j] = out[j, i] = value
    return out


def apply_injective_remap(
    dist: DiscreteDistribution,
    remap,
    nominal_min: float | None = None,
    nominal_max: float | None = None,
) -> DiscreteDistribution:
    """Transport a distribution through an injective level map.

    ``remap`` is a callable or a mapping defined on every domain level. The
    result lives on the mapped domain; its nominal range defaults to the
    tight span of the mapped levels. NPC is invariant under any such map,
    while PC scales with the nominal range.
    """
    lookup = remap.__getitem__ if isinstance(remap, Mapping) else remap
    mapped = np.array([float(lookup(v)) for v in dist.domain.values.tolist()], dtype=np.float64)
    if not np.all(np.isfinite(mapped)):
        raise ValueError("remapped levels must be finite")
    order = np.argsort(mapped, kind="stable")
    new_values = mapped[order]
    if np.any(np.diff(new_values) <= 0):
        dup = new_values[np.flatnonzero(np.diff(new_values) <= 0)[0]]
        raise NonInjectiveMapError(f"two levels collide at {dup!r} under the remap")
    new_domain = ValueDomain(
        new_values,
        new_values[0] if nominal_min is None else float(nominal_min),
        new_values[-1] if nominal_max is None else float(nominal_max),
    )
    return DiscreteDistribution(new_domain, dist.counts[order], dist.total)


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------

def _cross_checked(values: dict[str, float], tol: float = CROSS_CHECK_TOL) -> float:
    spread = max(values.values()) - min(values.values())
    if spread > tol:
        detail = ", ".join(f"{k}={v!r}" for k, v in sorted(values.items()))
        raise PathDisagreementError(f"compute paths disagree by {spread:g}: {detail}")
    return values["histogram_l1"]


def compute_contrast_report(
    dists,
    path: str = "histogram_l1",
    tie_break: str = TIE_LOWEST,
    unseen_policy: str = UNSEEN_UNASSIGNED,
    include_pairwise: bool | None = None,
) -> ContrastReport:
    """Full contrast report: NPC, PC on the nominal range, per-class error
    rates under the optimal LUT, and (for n > 2 by default) the pairwise
    two-class NPC matrix."""
    dists = list(dists)
    domain = require_shared_domain(dists)
    n = len(dists)
    if n < 2:
        raise TooFewClassesError("a contrast report needs at least two classes")
    npc = npc_multi_class(dists, path)
    recorded = "histogram_l1" if path == "all" else path
    lut = optimal_segmentation_lut(dists, tie_break=tie_break, unseen_policy=unseen_policy)
    errors = error_rates(dists, lut)
    if include_pairwise is None:
        include_pairwise = n > 2
    pairwise = pairwise_npc(dists, recorded) if include_pairwise else None
    return ContrastReport(
        npc=npc,
        pc=domain.nominal_range * npc,
        per_class_error=errors,
        n_classes=n,
        compute_path=recorded,
        pairwise=pairwise,
    )
