"""Exception types shared across the package."""


class SpinBundleError(Exception):
    """Base class for every error raised by spinbundle."""


class InvalidArgument(SpinBundleError, ValueError):
    pass


class BandLimitExceeded(SpinBundleError, ValueError):
    pass


class SpectrumInvalid(SpinBundleError, ValueError):
    """A power spectrum matrix is not symmetric positive semi-definite."""

    def __init__(self, message, ell=None):
        super().__init__(message)
        self.ell = ell


class CovarianceInvalid(SpinBundleError, ValueError):
    def __init__(self, message, ell=None):
        super().__init__(message)
        self.ell = ell


class InvalidLabel(SpinBundleError, ValueError):
    pass


class GroupPairUnsupported(SpinBundleError, ValueError):
    pass


class RankDeficient(SpinBundleError, ValueError):
    pass


class FileFormatError(SpinBundleError):
    """An input file does not follow the documented layout."""
