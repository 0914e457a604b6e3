"""Exception types shared across the package."""

from __future__ import annotations


class HypergtError(Exception):
    """Base class for every error raised by this package."""


class HypergraphFormatError(HypergtError, ValueError):
    """A hypergraph or matrix file could not be parsed or violates an invariant."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ParameterError(HypergtError, ValueError):
    """A structural parameter is undefined or a requested parameter is out of range."""


class CapacityError(HypergtError, ValueError):
    """An S-set needs more dummy vertices than the augmentation provides."""


class WidthError(HypergtError, ValueError):
    """A matrix does not have the columns a check or protocol needs."""


class WorkBudgetExceeded(HypergtError, RuntimeError):
    """Exact greedy would have to enumerate more candidate rows than allowed."""


class ConstructionError(HypergtError, RuntimeError):
    """A builder could not produce a verified selector.

    ``witness`` carries the failing :class:`~hypergt.selectors.Witness` of the
    last attempt when one is available.
    """

    def __init__(self, message: str, witness=None) -> None:
        self.witness = witness
        super().__init__(message)


class ConfigError(HypergtError, ValueError):
    """A sweep configuration file is malformed."""
