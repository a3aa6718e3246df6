"""Exception types shared across the package."""


class BBRecogError(Exception):
    """Base class for package errors."""


class ValidationError(BBRecogError, ValueError):
    """Malformed input: bad spec, wrong field, precondition violated."""


class BudgetExhausted(BBRecogError, RuntimeError):
    """A Monte-Carlo procedure ran out of its retry budget."""
