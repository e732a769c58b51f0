"""Exception hierarchy for kerrlind."""


class KerrLindError(Exception):
    """Base class for all package errors."""


class ConfigInvalid(KerrLindError, ValueError):
    pass


class DegenerateParams(KerrLindError, ValueError):
    pass


class InvalidFrequency(KerrLindError, ValueError):
    pass


class TruncationTooSmall(KerrLindError, ValueError):
    pass


class NegativeRate(KerrLindError, ValueError):
    """A computed channel rate came out negative (coefficient transcription bug)."""


class NumericalFailure(KerrLindError, RuntimeError):
    """Base for failures of the numerical pipeline (CLI exit code 3)."""


class DimensionOverflow(NumericalFailure):
    pass


class EigensolveFailure(NumericalFailure):
    pass


class AllZeroSpectrum(NumericalFailure):
    pass


class NullspaceNotFound(NumericalFailure):
    pass


class StepSizeUnderflow(NumericalFailure):
    pass


class FitDegenerate(NumericalFailure):
    pass
