"""Exception types shared across the solver."""


class OrbitminError(Exception):
    """Base class for all solver errors."""


class SingularityError(OrbitminError):
    """A loop entered the guarded neighborhood of the origin."""


class ProjectionError(OrbitminError):
    """No scaling of the loop reaches the constraint manifold."""


class DegenerateLoopError(OrbitminError):
    """Operation undefined for (near-)constant loops."""


class NegativeRateError(OrbitminError):
    """Period formula numerator is nonpositive: energy too low for this loop."""


class NoConvergenceError(OrbitminError):
    """No optimizer start reached the convergence tolerance."""


class CollisionError(OrbitminError):
    """Integrated trajectory crossed the singularity radius floor."""


class StepFailureError(OrbitminError):
    """Adaptive integrator step size underflowed or step budget exhausted."""


class DegenerateCertificateError(OrbitminError):
    """A probe loop of the certificate family approaches the singularity."""


class ConfigError(OrbitminError):
    """Invalid or malformed run configuration."""
