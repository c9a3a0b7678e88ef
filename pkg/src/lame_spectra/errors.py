"""Exception types shared across the package."""


class LameSpectraError(Exception):
    """Base class for all numerical / usage errors raised by this package."""


class PoleProximityError(LameSpectraError):
    """Evaluation point too close to a pole or zero of an elliptic function."""


class PathClearanceError(LameSpectraError):
    """No admissible integration path with the required clearance was found."""


class IntegratorError(LameSpectraError):
    """The ODE integrator failed to reach the requested tolerance."""


class EigenPairingError(LameSpectraError):
    """Simultaneous diagonalization of the monodromy pair failed."""


class DegenerateBranchError(LameSpectraError):
    """A spectral-curve point landed on a degenerate branch of a formula."""


class ZeroNotFoundError(LameSpectraError):
    """A Newton iteration failed to converge to a root."""


class InvalidParameterError(LameSpectraError):
    """Parameters violate a documented precondition."""
