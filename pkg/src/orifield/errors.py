"""Exception and warning types shared across the package."""


class OrifieldError(Exception):
    """Base class for all package errors."""


class NonInvertible(OrifieldError):
    """A 2x2 matrix required to be invertible has zero determinant."""


class ZeroFrequency(OrifieldError):
    """Spectral density requested at xi = 0, where it is singular."""


class OverlappingCones(OrifieldError):
    """Closed form for a sum of cone fields requires disjoint supports."""


class ZeroTensor(OrifieldError):
    """Orientation requested for a tensor with non-positive trace."""


class SingularJacobian(OrifieldError):
    """A deformation is not a local diffeomorphism at the requested point."""


class InvalidFrequencyGrid(OrifieldError):
    """Frequency grid size incompatible with the spatial grid."""


class DomainEscape(OrifieldError):
    """Warped coordinates leave the synthesized base domain."""


class BudgetExceeded(OrifieldError):
    """Direct-summation synthesis would exceed the configured operation cap."""


class ScaleOutOfBand(OrifieldError):
    """Requested wavelet scale has no support on the image lattice."""


class EmptyScale(OrifieldError):
    """Requested scale is not present in the pyramid."""


class InsufficientScales(OrifieldError):
    """Scaling-exponent regression needs at least two scales."""


class OverlappingConesWarning(UserWarning):
    """Sum of cone specs with overlapping angular supports."""


class DegenerateConformalWarning(UserWarning):
    """Conformal deformation with a = b = 0 falls back to a global rotation."""
