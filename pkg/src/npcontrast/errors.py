"""Exception hierarchy for npcontrast.

Input-shaped problems (bad files, bad masks, bad samples) and computation
problems (mismatched domains, oversized enumerations) are kept distinct so
callers such as the CLI can map them to different exit codes.
"""


class NpcontrastError(Exception):
    """Base class for all library errors."""


class InputError(NpcontrastError):
    """The caller supplied data that violates a precondition."""


class ComputationError(NpcontrastError):
    """A computation could not be carried out on otherwise valid inputs."""


class EmptyClassError(InputError):
    """A class has zero sampled values."""


class ValueOutsideDomainError(InputError):
    """A sample value is not a level of the associated value domain."""


class DomainMismatchError(ComputationError):
    """Two operands do not share the same value domain."""


class TooFewClassesError(InputError):
    """Fewer than two class distributions were supplied."""


class NonInjectiveMapError(ComputationError):
    """A level remap sent two distinct levels to the same target."""


class InstanceTooLargeError(ComputationError):
    """The brute-force enumeration bound was exceeded."""


class UncoveredLevelError(ComputationError):
    """A level with positive mass has no explicit LUT assignment."""


class PathDisagreementError(ComputationError):
    """Cross-checked compute paths disagreed beyond tolerance."""


class UnsupportedFormatError(InputError):
    """The image file could not be decoded into a supported plane."""


class AmbiguousChannelsError(InputError):
    """A multi-channel image was given without a channel selection."""


class DimensionMismatchError(InputError):
    """Mask and image dimensions differ."""


class EmptyClassInMaskError(InputError):
    """A class id in the declared range has no labeled pixel."""
