"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ConfigError -> 2, numerical failures
(TruncationError, IntegrationError, ConvergenceError) -> 3, precondition
violations -> 4.
"""


class CavpurifyError(Exception):
    """Base class for all library errors."""


class ConfigError(CavpurifyError):
    """Invalid or inconsistent configuration input."""


class NumericalError(CavpurifyError):
    """A numerical procedure failed to meet its accuracy contract."""


class TruncationError(NumericalError):
    """The Fock-space cutoff is too small for the requested computation."""


class IntegrationError(NumericalError):
    """The master-equation integrator failed (step-size underflow etc.)."""


class ConvergenceError(NumericalError):
    """An iteration did not reach its target within the allowed steps."""


class PreconditionError(CavpurifyError):
    """An operation was called outside its documented domain."""


class UndefinedFidelityError(PreconditionError):
    """Fidelity requested against a zero-norm reference state."""
