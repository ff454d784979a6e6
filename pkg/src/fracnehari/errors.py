"""Exception types shared across the package."""


class NonFiniteFieldError(ValueError):
    """A field holds NaN or Inf samples."""


class NumericalOverflow(ArithmeticError):
    """An exponential nonlinearity overflowed double precision.

    ``amplitude`` is the largest |u| at which a non-finite value appeared.
    """

    def __init__(self, message, amplitude=float("nan")):
        super().__init__(message)
        self.amplitude = amplitude


class ProjectionFailure(RuntimeError):
    """No sign change of the Nehari functional along the ray t -> t*u."""
