"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so every failure the simulator can
detect on its own should surface as one of the classes below.
"""


class QBError(Exception):
    """Base class for all simulator errors."""


class ConfigError(QBError, ValueError):
    """Invalid run configuration (CLI exit code 2)."""


class InvariantViolation(QBError, ArithmeticError):
    """A numerical invariant failed beyond its tolerance (CLI exit code 3)."""


class ResourceGuardError(QBError, ValueError):
    """Requested cutoff or dimension is past the configured guard (CLI exit code 4)."""


class TruncationError(QBError, ValueError):
    """A coherent state does not fit in the requested Fock cutoff."""

    def __init__(self, message, required_cutoff):
        super().__init__(message)
        self.required_cutoff = required_cutoff


class DegenerateStateError(QBError, ValueError):
    """A superposition collapses to the zero vector."""


class LayoutMismatchError(QBError, ValueError):
    """Objects defined on different Hilbert-space layouts were combined."""


class PropagatorError(QBError, RuntimeError):
    """Diagonalisation of an excitation sector failed."""
