"""Task-dependent image contrast via normalized potential contrast."""

from .domain import (
    COMPUTE_PATHS,
    TIE_BREAKS,
    TIE_HIGHEST,
    TIE_LOWEST,
    UNSEEN_NEAREST,
    UNSEEN_POLICIES,
    UNSEEN_UNASSIGNED,
    ClassSamples,
    ClassifierLUT,
    ContrastReport,
    DiscreteDistribution,
    ValueDomain,
    require_shared_domain,
)
from .errors import (
    AmbiguousChannelsError,
    ComputationError,
    DimensionMismatchError,
    DomainMismatchError,
    EmptyClassError,
    EmptyClassInMaskError,
    InputError,
    InstanceTooLargeError,
    NonInjectiveMapError,
    NpcontrastError,
    PathDisagreementError,
    TooFewClassesError,
    UncoveredLevelError,
    UnsupportedFormatError,
    ValueOutsideDomainError,
)
from .metrics import (
    apply_injective_remap,
    build_distribution,
    compute_contrast_report,
    error_rates,
    npc_mean_difference_form,
    npc_multi_class,
    npc_two_class,
    optimal_binarization,
    optimal_segmentation_lut,
    pairwise_npc,
    pc_multi_class,
    pc_two_class,
)
from .oracle import brute_force_npc_oracle

__version__ = "0.1.0"
