"""Exception types shared across the package."""

from __future__ import annotations


class CarveError(Exception):
    """Base class for every error this package raises on purpose."""


class UnbalancedBraces(CarveError):
    """The given range is not a complete, brace-balanced method."""


class EmptyBody(CarveError):
    """The method body holds no statements."""


class LineNotInBody(CarveError):
    """A queried line lies outside the method body."""


class UnsalvageableRange(CarveError):
    """Scope normalization would have to grow past the method body."""


class EndpointUnreachable(CarveError):
    """A live request to the model endpoint failed."""

    def __init__(self, iteration: int, reason: str) -> None:
        super().__init__(f"iteration {iteration}: endpoint unreachable ({reason})")
        self.iteration = iteration


class MissingFixture(CarveError):
    """Replay mode found no recorded response for an iteration."""

    def __init__(self, iteration: int, key: str) -> None:
        super().__init__(f"iteration {iteration}: no recorded response for key {key}")
        self.iteration = iteration
        self.key = key


class PlanInfeasible(CarveError):
    """A parameter or return type could not be recovered from the source."""


class StaleSource(CarveError):
    """The source text changed between planning and applying."""


class ReparseFailure(CarveError):
    """The rewritten source no longer parses; nothing was persisted."""


class CorpusMismatch(CarveError):
    """Results reference a method that is not part of the oracle corpus."""
