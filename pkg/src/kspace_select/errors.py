"""Exception types raised across the package."""


class SizingError(ValueError):
    """Array shape, level count or budget is incompatible with the operation."""


class SlotError(IndexError):
    """A pyramid slot or frequency index does not exist for the given shape."""


class EmptySupportError(ValueError):
    """A selector that needs wavelet support information received none."""


class DivergenceError(ArithmeticError):
    """An iterative recovery blew up past its divergence guard."""


class ComplexityError(ValueError):
    """Exhaustive enumeration was requested on an instance that is too large."""


class UndefinedReferenceError(ZeroDivisionError):
    """The reference image has zero norm on the evaluation region."""
