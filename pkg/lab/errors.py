"""Exception hierarchy shared by the lab modules and the orchestration layer."""
from __future__ import annotations


class HyperlabError(Exception):
    """Base class for all errors raised by hyperlab."""


class InvalidParameterError(HyperlabError, ValueError):
    """A scalar parameter is outside its documented range (p < 1, eta not in (0,1), ...)."""


class DimensionMismatchError(HyperlabError, ValueError):
    """A point does not have the dimension of its group model."""


class ModelMismatchError(HyperlabError, ValueError):
    """Two lattice functions (or a function and a region) live on different models."""


class EmptyRegionError(HyperlabError, ValueError):
    """An operation that needs a nonempty compact region received an empty one."""


class PeriodicElementError(HyperlabError, ValueError):
    """The translation element is periodic; the criteria need an aperiodic one."""


class InternalConsistencyError(HyperlabError, RuntimeError):
    """Two evaluation paths disagree, or an inequality that must hold failed."""


class ConfigFileError(HyperlabError):
    """A configuration file is missing, unreadable or not valid JSON."""


class ConfigValidationError(HyperlabError):
    """The configuration violates its schema; carries every problem found."""

    def __init__(self, errors: list[dict]):
        self.errors = errors
        super().__init__("; ".join(f"{e['path']}: {e['message']}" for e in errors))
