"""Value domains, class samples, discrete distributions, classifier LUTs.

Probability mass is kept as exact integer counts over the domain's levels and
only converted to floating point at a report boundary. This makes the various
closed-form contrast computations agree exactly instead of merely within a
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import (
    DomainMismatchError,
    EmptyClassError,
    ValueOutsideDomainError,
)

UNSEEN_UNASSIGNED = "unassigned"
UNSEEN_NEAREST = "nearest"
UNSEEN_POLICIES = (UNSEEN_UNASSIGNED, UNSEEN_NEAREST)

TIE_LOWEST = "lowest"
TIE_HIGHEST = "highest"
TIE_BREAKS = (TIE_LOWEST, TIE_HIGHEST)

COMPUTE_PATHS = ("definitional", "histogram_l1", "max_form", "min_form")


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ValueDomain:
    """The finite ordered set of levels an image can take, plus the nominal
    range used to scale potential contrast.

    ``values`` must be strictly increasing with at least two distinct levels;
    a constant image has no usable domain.
    """

    values: np.ndarray
    nominal_min: float
    nominal_max: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("domain values must be a 1-D array")
        if values.size < 2:
            raise ValueError("a value domain needs at least two levels")
        if not np.all(np.isfinite(values)):
            raise ValueError("domain values must be finite")
        if not np.all(np.diff(values) > 0):
            raise ValueError("domain values must be strictly increasing with no duplicates")
        nominal_min = float(self.nominal_min)
        nominal_max = float(self.nominal_max)
        if not (np.isfinite(nominal_min) and np.isfinite(nominal_max)):
            raise ValueError("nominal range must be finite")
        if nominal_min > values[0] or nominal_max < values[-1]:
            raise ValueError("nominal range must contain all domain values")
        if not nominal_min < nominal_max:
            raise ValueError("nominal_min must be strictly less than nominal_max")
        object.__setattr__(self, "values", _as_readonly(values))
        object.__setattr__(self, "nominal_min", nominal_min)
        object.__setattr__(self, "nominal_max", nominal_max)

    @classmethod
    def from_levels(
        cls,
        levels,
        nominal_min: float | None = None,
        nominal_max: float | None = None,
    ) -> "ValueDomain":
        """Build a domain from an unordered collection of levels.

        Duplicates are collapsed; the nominal range defaults to the tight
        span of the levels themselves.
        """
        values = np.unique(np.asarray(levels, dtype=np.float64))
        if values.size < 2:
            raise ValueError("a value domain needs at least two distinct levels")
        lo = float(values[0]) if nominal_min is None else float(nominal_min)
        hi = float(values[-1]) if nominal_max is None else float(nominal_max)
        return cls(values, lo, hi)

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def nominal_range(self) -> float:
        return self.nominal_max - self.nominal_min

    def index_of(self, levels) -> np.ndarray:
        """Map level values to their domain indices, raising if any value is
        not exactly a domain level."""
        arr = np.asarray(levels, dtype=np.float64)
        idx = np.searchsorted(self.values, arr)
        idx_clipped = np.minimum(idx, self.size - 1)
        ok = self.values[idx_clipped] == arr
        if not np.all(ok):
            bad = arr[~ok].ravel()
            raise ValueOutsideDomainError(
                f"value {bad[0]!r} is not a level of the domain"
            )
        return idx_clipped

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ValueDomain):
            return NotImplemented
        return (
            self.nominal_min == other.nominal_min
            and self.nominal_max == other.nominal_max
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.values.tobytes(), self.nominal_min, self.nominal_max))

    def __repr__(self) -> str:
        return (
            f"ValueDomain({self.size} levels in [{self.values[0]:g}, "
            f"{self.values[-1]:g}], nominal [{self.nominal_min:g}, {self.nominal_max:g}])"
        )


@dataclass(frozen=True, eq=False)
class ClassSamples:
    """Labeled pixel values for one class."""

    class_id: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if int(self.class_id) < 1:
            raise ValueError("class_id must be a positive integer")
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.size == 0:
            raise EmptyClassError(f"class {self.class_id} has no samples")
        object.__setattr__(self, "class_id", int(self.class_id))
        object.__setattr__(self, "values", _as_readonly(values))

    @property
    def count(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Normalized histogram of one class over a value domain.

    ``counts[i]`` is the number of samples at ``domain.values[i]``; mass at a
    level is the exact rational counts[i]/total.
    """

    domain: ValueDomain
    counts: np.ndarray
    total: int

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (self.domain.size,):
            raise ValueError("counts must align with the domain levels")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        total = int(self.total)
        if total < 1:
            raise EmptyClassError("distribution total must be at least 1")
        if int(counts.sum()) != total:
            raise ValueError("counts must sum to total")
        object.__setattr__(self, "counts", _as_readonly(counts))
        object.__setattr__(self, "total", total)

    @classmethod
    def from_counts(cls, domain: ValueDomain, counts) -> "DiscreteDistribution":
        arr = np.asarray(counts, dtype=np.int64)
        return cls(domain, arr, int(arr.sum()))

    @cached_property
    def masses(self) -> np.ndarray:
        """Float probability per domain level (report boundary only)."""
        return _as_readonly(self.counts / self.total)

    @property
    def support(self) -> np.ndarray:
        return self.domain.values[self.counts > 0]

    def mass_at(self, level: float) -> float:
        idx = int(self.domain.index_of([level])[0])
        return self.counts[idx] / self.total

    def fraction_at(self, level: float) -> Fraction:
        idx = int(self.domain.index_of([level])[0])
        return Fraction(int(self.counts[idx]), self.total)


def require_shared_domain(dists) -> ValueDomain:
    """Return the common domain of the given distributions or raise."""
    dists = list(dists)
    if not dists:
        raise ValueError("at least one distribution is required")
    domain = dists[0].domain
    for d in dists[1:]:
        if d.domain != domain:
            raise DomainMismatchError("distributions live on different value domains")
    return domain


@dataclass(frozen=True, eq=False)
class ClassifierLUT:
    """Value-to-class lookup table.

    The explicit assignment covers exactly the union of supports of the
    distributions it was built from. Domain levels outside that set are
    resolved by ``unseen_policy``: ``unassigned`` maps them to class 0,
    ``nearest`` borrows the class of the closest assigned level (the lower
    level winning distance ties).
    """

    domain: ValueDomain
    levels: np.ndarray
    classes: np.ndarray
    n_classes: int
    unseen_policy: str = UNSEEN_UNASSIGNED

    def __post_init__(self) -> None:
        levels = np.asarray(self.levels, dtype=np.float64)
        classes = np.asarray(self.classes, dtype=np.int64)
        if levels.shape != classes.shape or levels.ndim != 1:
            raise ValueError("levels and classes must be matching 1-D arrays")
        if levels.size and not np.all(np.diff(levels) > 0):
            raise ValueError("LUT levels must be strictly increasing")
        if self.unseen_policy not in UNSEEN_POLICIES:
            raise ValueError(f"unknown unseen policy {self.unseen_policy!r}")
        if int(self.n_classes) < 2:
            raise ValueError("a classifier LUT needs at least two classes")
        if classes.size and (classes.min() < 1 or classes.max() > self.n_classes):
            raise ValueError("assigned classes must lie in 1..n_classes")
        object.__setattr__(self, "levels", _as_readonly(levels))
        object.__setattr__(self, "classes", _as_readonly(classes))
        object.__setattr__(self, "n_classes", int(self.n_classes))

    @property
    def assignment(self) -> dict[float, int]:
        """Explicit level-to-class map over the union of supports."""
        return {float(v): int(c) for v, c in zip(self.levels, self.classes)}

    @cached_property
    def domain_table(self) -> np.ndarray:
        """Class per domain level with the unseen policy applied; 0 marks
        unassigned levels."""
        table = np.zeros(self.domain.size, dtype=np.int64)
        if self.levels.size == 0:
            return _as_readonly(table)
        assigned_idx = self.domain.index_of(self.levels)
        table[assigned_idx] = self.classes
        if self.unseen_policy == UNSEEN_NEAREST:
            unseen = np.setdiff1d(
                np.arange(self.domain.size), assigned_idx, assume_unique=True
            )
            if unseen.size:
                table[unseen] = self.classes[
                    _nearest_indices(self.levels, self.domain.values[unseen])
                ]
        return _as_readonly(table)

    def class_of(self, level: float) -> int:
        idx = int(self.domain.index_of([level])[0])
        return int(self.domain_table[idx])

    def apply_to_levels(self, levels: np.ndarray) -> np.ndarray:
        """Vectorized lookup for an array of level values."""
        idx = self.domain.index_of(levels)
        return self.domain_table[idx]


def _nearest_indices(sorted_levels: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Index of the nearest entry of sorted_levels for each query; the lower
    level wins exact distance ties."""
    pos = np.searchsorted(sorted_levels, queries)
    left = np.clip(pos - 1, 0, sorted_levels.size - 1)
    right = np.clip(pos, 0, sorted_levels.size - 1)
    d_left = np.abs(queries - sorted_levels[left])
    d_right = np.abs(sorted_levels[right] - queries)
    return np.where(d_left <= d_right, left, right)


@dataclass(frozen=True, eq=False)
class ContrastReport:
    """Computed contrast values plus the provenance of the compute path."""

    npc: float
    pc: float
    per_class_error: dict[int, float]
    n_classes: int
    compute_path: str
    pairwise: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        if self.compute_path not in COMPUTE_PATHS:
            raise ValueError(f"unknown compute path {self.compute_path!r}")
        if self.pairwise is not None:
            object.__setattr__(self, "pairwise", _as_readonly(np.asarray(self.pairwise, dtype=np.float64)))
