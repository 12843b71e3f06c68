"""Exception types shared across the package."""


class HardlineError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(HardlineError, ValueError):
    """Malformed numeric input: wrong shape, non-finite entries, bad size."""


class SingularChartError(HardlineError):
    """Chart evaluation attempted where the leading position gap vanishes."""


class NotOnManifoldError(HardlineError):
    """Phase point is not on the simultaneous-collision manifold."""


class BoundaryPointError(HardlineError):
    """Point lies on a boundary stratum where the requested map is undefined."""


class NoCollisionError(HardlineError):
    """Collision time requested for data that never reach the collision."""


class DomainViolationError(HardlineError):
    """Velocity argument outside the cone a scattering map is defined on."""


class SingularWeightError(HardlineError):
    """Velocity weight evaluated at a vector with a repeated component."""


class StepTooLargeError(HardlineError):
    """Finite-difference step exceeds the distance to the cone boundary."""


class WrongBranchError(HardlineError):
    """Chart-level flow evaluated outside the branch region it is valid on."""


class BoundaryUnsupportedError(HardlineError):
    """Flow started from boundary data; only interior flows are constructed."""


class RegionTooSmallError(HardlineError):
    """Integration region fails to cover the support of the test function."""


class InvalidDensityError(HardlineError):
    """Proposed density violates a symmetry required for invariance."""


class ConfigError(HardlineError):
    """Run configuration failed schema validation."""
