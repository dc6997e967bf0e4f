"""Shared exception types."""


class SizeLimitError(Exception):
    """A construction would exceed its configured size bound."""


class InfeasibleError(Exception):
    """An exhaustive check was requested on a space too large to enumerate."""


class IncoherentPatchError(Exception):
    """A patch system violates the coherence precondition of an operation."""
