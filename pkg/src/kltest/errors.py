class ValidationError(ValueError):
    """Input violates a documented precondition."""


class InfiniteExponentError(ValueError):
    """The requested quantity is infinite because the supports do not overlap."""


class EnumerationLimitError(ValueError):
    """Exact enumeration would exceed the configured size guard."""
