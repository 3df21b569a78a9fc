"""Exception hierarchy shared by the whole package.

The CLI maps these onto exit codes: DomainError -> 1, PrecisionError -> 2,
ContradictionError -> 3.
"""


class CantorError(Exception):
    pass


class DomainError(CantorError):
    """Bad input: out-of-range rational, malformed word, unsupported slot."""


class RuleViolation(DomainError):
    """A game move that breaks the rules of the configured game."""


class PrecisionError(CantorError):
    """The requested certification was not reached within the depth budget.

    Carries the best interval (or other partial result) computed so far.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ContradictionError(CantorError):
    """A verification run produced evidence against the claimed reduction."""
