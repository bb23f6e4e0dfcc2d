"""Exception hierarchy.

``AuxselError`` covers domain errors (the CLI maps them to exit code 1);
``FormatError`` covers malformed input files (exit code 2, together with
ordinary IO failures).
"""


class AuxselError(Exception):
    """Base class for domain errors."""


class FormatError(Exception):
    """Malformed input file or schema violation (not a domain error)."""


# graph construction
class CycleDetected(AuxselError):
    pass


class InvalidId(AuxselError):
    pass


class GraphTooLarge(AuxselError):
    pass


# d-separation queries
class OverlappingSets(AuxselError):
    pass


class NotObserved(AuxselError):
    pass


# conditioning-set selection
class NoObservedSources(AuxselError):
    pass


class NoCandidates(AuxselError):
    pass


# SCM simulation
class NonGaussianNoise(AuxselError):
    pass


class SingularConditioning(AuxselError):
    pass


# mixing functions
class DimensionTooSmall(AuxselError):
    pass


class DimensionMismatch(AuxselError):
    pass


# rank checking
class SingularCovariance(AuxselError):
    pass


class NonFiniteDensity(AuxselError):
    pass


class TooFewSamples(AuxselError):
    pass


# metrics
class ConstantColumn(AuxselError):
    pass


class RowCountMismatch(AuxselError):
    pass


class NonSquare(AuxselError):
    pass


class DegenerateMatrix(AuxselError):
    pass
