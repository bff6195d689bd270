"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(ValueError):
    """A request is malformed (bad shapes, unsupported options, bad config)."""


class HypothesisError(UsageError):
    """A closed form was requested outside the range where it is valid."""
