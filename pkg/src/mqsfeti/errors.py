"""Exception hierarchy shared by all modules."""


class MQSError(Exception):
    """Base class for every error raised by :mod:`mqsfeti`."""


class ConfigurationError(MQSError, ValueError):
    """Invalid geometry, materials, source parameters or run configuration."""


class TopologyError(MQSError):
    """Disconnected or non simply connected interface / subdomain graphs."""


class AssemblyError(MQSError):
    """Degenerate elements or inconsistent index maps during assembly."""


class SourceError(MQSError):
    """Source current violating the discrete solenoidality condition."""


class SolverError(MQSError):
    """Singular factorization or non-convergent iteration.

    ``history`` carries the residual history of an iterative solve, if any.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class GluingError(MQSError):
    """Torn coefficient vectors violating the interface constraint."""


class DomainError(MQSError):
    """Quantity requested where it is undefined (e.g. E outside the conductor)."""
