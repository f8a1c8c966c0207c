"""Exception hierarchy shared by all modules."""


class LevSpinError(Exception):
    """Base class for every error raised by levspin."""


class DomainError(LevSpinError, ValueError):
    """Input lies outside the region where a formula is defined."""


class GeometryError(DomainError):
    """Physically impossible or singular placement of magnet, NV or wire."""


class NoTrapError(LevSpinError):
    """The magnet parameters do not produce a confining potential."""


class TruncationError(LevSpinError):
    """Requested state or operator does not fit the Fock truncation."""


class InstabilityError(LevSpinError):
    """Parametric pump exceeds the detuning; the squeezed frame is undefined."""


class DegenerateBasisError(DomainError):
    """Dressed basis is undefined because detuning and Rabi frequency both vanish."""


class SWValidityError(LevSpinError):
    """Lamb-Dicke parameter too large for the Schrieffer-Wolff reduction."""


class LayoutError(LevSpinError, ValueError):
    """Operator dimensions do not match the Hilbert-space layout."""


class InvalidStateError(LevSpinError, ValueError):
    """Density matrix is not Hermitian, unit-trace and positive within tolerance."""


class IntegrationError(LevSpinError, RuntimeError):
    """The ODE integrator failed (for example, step-size underflow)."""


class QuadratureError(LevSpinError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConfigError(LevSpinError):
    """Invalid run configuration."""
