"""Exception types shared across the package."""


class SpinFFError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SpinFFError):
    """Bad model kind, malformed run configuration, unknown keys."""


class DomainError(SpinFFError):
    """Non-finite couplings or parameters outside their declared range."""


class DegeneracyError(SpinFFError):
    """Eigenvalue gap around the tracked state below gap_min; gauge undefined."""


class GaugeError(SpinFFError):
    """Gauge anchor too small at a stencil point, or phase residue too large."""


class ConsistencyError(SpinFFError):
    """Analytic/numeric mismatch: cube-root branch or merged-row symmetry."""


class StepSizeError(SpinFFError):
    """Integrator norm drift exceeded tolerance; a smaller dt is needed."""
