"""Exception hierarchy shared by all divlab modules."""


class DivlabError(Exception):
    """Base class for all structured divlab errors."""


class StructuralError(DivlabError):
    """A table, matrix, or file is malformed (missing entries, bad labels,
    negative values, wrong sizes)."""


class ParseError(StructuralError):
    """Input text is not valid JSON or not in a recognized format."""


class EmptySubset(DivlabError):
    """An operation that needs a nonempty subset received the empty set."""


class EmptySupport(EmptySubset):
    """A support set must be nonempty."""


class CapExceeded(DivlabError):
    """A ground set would exceed the configured size cap."""


class MixedBase(DivlabError):
    """Functions in one family must share the same base diversity."""


class NotAdmissible(DivlabError):
    """A table does not define a legal one-point extension."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DuplicateLabel(DivlabError):
    """A fresh point label collides with an existing one."""


class InvalidPartialIso(DivlabError):
    """A partial isomorphism violates its value-preservation invariant."""


class DistortionTooLarge(DivlabError):
    """A point map distorts some subset value by at least the allowed bound."""


class InfeasibleInterval(DivlabError):
    """A sampling interval is empty (cap below the forced lower bound, or no
    grid point fits)."""


class GenerationExhausted(DivlabError):
    """A rejection sampler ran out of retries."""
