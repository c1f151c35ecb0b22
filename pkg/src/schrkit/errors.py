"""Exception types shared across the toolkit."""


class SchrkitError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(SchrkitError, ValueError):
    """A model parameter violates its constraints (negative, non-finite,
    or a required denominator is not strictly positive)."""


class LayoutError(SchrkitError, ValueError):
    """A compartment vector or field does not match the expected model layout."""


class DomainError(SchrkitError, ValueError):
    """An operation was called outside its mathematical domain."""


class NoEndemicEquilibriumError(DomainError):
    """Requested the drug-addiction equilibrium below the invasion threshold."""


class SolverAbortError(SchrkitError, RuntimeError):
    """Time integration produced a non-finite state or negativity beyond
    the roundoff tolerance."""


class ConfigError(SchrkitError, ValueError):
    """A scenario configuration file is missing a key, contains an unknown
    key, or violates a validation constraint."""
