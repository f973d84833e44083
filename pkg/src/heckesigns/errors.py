class InvariantViolation(RuntimeError):
    """A mathematical invariant failed; always signals a bug upstream."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured work budget."""
