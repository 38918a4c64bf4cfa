"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical/analysis failures with 3, capacity limits with 4.
"""


class IsingQuenchError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(IsingQuenchError):
    """Invalid configuration file, option value, or override path."""


class ProtocolError(IsingQuenchError):
    """An operation was invoked outside its valid protocol stage
    (e.g. cluster equilibration with a symmetry-breaking field on)."""


class NumericalError(IsingQuenchError):
    """An iterative numerical routine failed to reach its tolerance."""


class AnalysisError(IsingQuenchError):
    """The collapse/crossing analysis could not produce a valid result."""


class CapacityError(IsingQuenchError):
    """Requested system size exceeds the representable budget."""
