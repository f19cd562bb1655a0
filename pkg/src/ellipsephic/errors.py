"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation errors are exit 2, budget
refusals exit 3, and internal invariant breaches exit 4.
"""


class EllipsephicError(Exception):
    """Base class for all library errors."""


class ValidationError(EllipsephicError):
    """Invalid parameters or malformed input; the request never started."""


class BudgetError(EllipsephicError):
    """A computation was refused because it would exceed a configured budget.

    Refusals are all-or-nothing: no partial result is ever returned.
    """


class InvariantError(EllipsephicError):
    """An internal mathematical invariant failed; indicates a bug."""
