"""Error taxonomy shared across the package.

Three failure classes are kept apart on purpose: callers misusing the API,
bad input traces, and bugs in our own bookkeeping. The CLI maps them to
distinct exit codes.
"""


class UsageError(ValueError):
    """The caller violated an API precondition (unknown element, dead set, ...)."""


class InputError(Exception):
    """The input trace is unacceptable: malformed, invalid, or outside the
    restrictions the selected algorithm requires."""


class ParseError(InputError):
    """Malformed trace text. Carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class InvariantError(AssertionError):
    """An internal invariant broke; this is a bug in the detector, not bad input."""
