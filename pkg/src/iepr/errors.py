"""Exception hierarchy shared by all modules.

Each class maps to one CLI exit code (see :mod:`iepr.cli`).
"""


class IEPRError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 2


class SpecError(IEPRError, ValueError):
    """Invalid circuit specification or parameter values."""

    exit_code = 1


class FormatError(IEPRError, ValueError):
    """Malformed input data (files, matrices, field exports)."""

    exit_code = 1


class ConsistencyError(IEPRError):
    """Participation data violates the orthonormality relations."""


class NumericsError(IEPRError):
    """A numerical routine failed to converge."""


class PhysicsError(IEPRError):
    """The model is unphysical, e.g. an overcoupled circuit."""


class UnsupportedError(IEPRError):
    """The request lies outside what the method can resolve."""


class SearchError(IEPRError):
    """A parameter search found no interior optimum."""


class OracleError(IEPRError):
    """The Fock-space oracle lacks the states it needs."""


class ResourceError(IEPRError):
    """A requested computation exceeds the configured size cap."""

    exit_code = 3


class LabelWarning(UserWarning):
    """Eigenstate labeling is ambiguous (strongly hybridized states)."""
