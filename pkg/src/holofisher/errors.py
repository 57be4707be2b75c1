"""Exception types raised by holofisher."""


class SingularLocusError(ValueError):
    """A point or path touches the poles of the Pfaffian connection.

    ``t`` is the path parameter of the offending point when the error comes
    from segment transport, otherwise ``None``.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ConcentrationError(ValueError):
    """Sample mean is too close to a rotation for a direct fit."""


class GaugeError(ArithmeticError):
    """The log-scale pipeline lost positivity of the leading entry."""


class SingularLocusWarning(UserWarning):
    pass


class ConvergenceWarning(UserWarning):
    pass
