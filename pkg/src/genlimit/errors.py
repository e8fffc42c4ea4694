"""Exception hierarchy shared by every module."""

from __future__ import annotations


class GenLimitError(Exception):
    """Base class for all package errors."""


class UnknownBasePair(GenLimitError):
    """Two bases have no closed-form relation entry."""


class IndexOutOfRange(GenLimitError):
    pass


class CapabilityMissing(GenLimitError):
    """A collection lacks an oracle that an operation requires."""


class ContractViolation(GenLimitError):
    """An oracle was queried outside the inputs it is defined on."""


class NoTellTale(GenLimitError):
    """The language provably has no tell-tale of the requested kind."""


class EmptyVersionSpace(GenLimitError):
    pass


class NotAViolationPoint(GenLimitError):
    pass


class WrongCollection(GenLimitError):
    pass


class EmptySupport(GenLimitError):
    pass


class UndefinedSupport(GenLimitError):
    pass


class StalledPhase(GenLimitError):
    """An adversary phase exceeded its step budget."""

    def __init__(self, budget: int, reason: str):
        super().__init__(f"phase stalled after {budget} steps: {reason}")
        self.budget = budget
        self.reason = reason


class ConfigError(GenLimitError):
    """Invalid configuration; ``field`` names the offending key when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class CapabilityError(ConfigError):
    """A configured cell asks a collection for an oracle it does not offer."""
