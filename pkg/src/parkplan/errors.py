"""Exception types shared across the package."""


class ParkPlanError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(ParkPlanError):
    """A config object violates one of its invariants."""


class InputError(ParkPlanError):
    """Caller supplied an unusable input (bad file, bad pose, bad index)."""


class ScenarioFormatError(InputError):
    """Scenario document exists but cannot be parsed or fails validation."""


class InfeasibleGeometryError(ParkPlanError):
    """Requested synthetic layout cannot physically contain the vehicle."""


class SamplingExhaustedError(ParkPlanError):
    """Rejection sampling ran out of attempts without a collision-free result."""


class ResetRejectedError(ParkPlanError):
    """Environment reset was asked to start from a colliding pose."""


class ProtocolError(ParkPlanError):
    """Environment stepped after episode termination."""


class NumericError(ParkPlanError):
    """A numeric quantity (loss, gradient) became non-finite."""
