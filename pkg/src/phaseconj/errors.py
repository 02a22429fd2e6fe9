"""Exception hierarchy for phaseconj."""


class PhaseConjError(Exception):
    """Base class for all errors raised by this package."""


class InvalidState(PhaseConjError, ValueError):
    """Ill-shaped or non-symmetric Gaussian state data."""


class InvalidModeError(PhaseConjError, ValueError):
    """A mode index (or quadrature label) does not exist for the given state."""


class NonCanonicalTransform(PhaseConjError, ValueError):
    """A Bogoliubov transform violates the canonical commutation relations."""


class UnphysicalChannel(PhaseConjError, ValueError):
    """A Gaussian channel is not completely positive."""


class InvalidParameter(PhaseConjError, ValueError):
    """A numeric parameter is outside the allowed domain."""
