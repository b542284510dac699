"""Exception types shared by every layer of the package."""


class MeshDistError(Exception):
    """Base class for all errors raised by meshdist."""


class InvalidParameterError(MeshDistError, ValueError):
    """An argument lies outside the domain of a pure arithmetic routine."""


class ConfigurationError(MeshDistError, ValueError):
    """A simulation or layout configuration is inconsistent.

    ``keys`` names the offending configuration parameters, if known.
    """

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)


class ConsistencyError(MeshDistError, RuntimeError):
    """Internal data structures disagree with each other."""
