"""Exception types shared by the library and mapped to CLI exit codes."""


class DomainError(ValueError):
    """Input outside the hypotheses of the formula being evaluated (exit 2)."""


class TruncationError(DomainError):
    """Not enough coefficients to reach the requested accuracy."""


class InputFormatError(ValueError):
    """Malformed input file (exit 3)."""
