"""Exception hierarchy shared across the package.

ConfigError covers anything a user can fix by editing inputs (schema,
physics preconditions, dimension caps).  NumericalError covers failures of
the numerics themselves (solver non-convergence, spectra violating
positivity beyond tolerance).  The CLI maps them to exit codes 2 and 3.
"""


class QentError(Exception):
    """Base class for all package errors."""


class ConfigError(QentError):
    """Invalid configuration or physics precondition violation."""


class DimensionCapError(ConfigError):
    """Requested Hilbert-space or replica dimension exceeds the configured cap."""


class NumericalError(QentError):
    """A numerical routine failed or produced an out-of-tolerance result."""


class CutoffError(NumericalError):
    """Strict-mode bosonic cutoff violation (amplitude leakage above the cap)."""
