class InputError(ValueError):
    """Malformed data or configuration (CLI exit code 2)."""


class NumericalError(ArithmeticError):
    """A factorization or sampler step failed numerically (CLI exit code 3)."""
