"""Exception hierarchy shared by all modules."""


class PlasmonProbeError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(PlasmonProbeError, ValueError):
    """Invalid run configuration.

    ``errors`` holds ``(field, message)`` pairs so that every problem in a
    config file can be reported at once.
    """

    def __init__(self, errors):
        if isinstance(errors, tuple) and len(errors) == 2 and isinstance(errors[0], str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.errors))


class NotEvanescentError(PlasmonProbeError, ValueError):
    """The probe angle does not produce an evanescent wave in the gap."""


class NumericalError(PlasmonProbeError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class DegenerateStackError(NumericalError):
    pass


class NoBracketError(NumericalError):
    """The sampled objective has no interior minimum on the interval."""


class QuadratureError(NumericalError):
    def __init__(self, message, error_bound):
        self.error_bound = error_bound
        super().__init__(f"{message} (achieved error bound {error_bound:.3g})")


class FitError(NumericalError):
    def __init__(self, message, residual_norm):
        self.residual_norm = residual_norm
        super().__init__(f"{message} (residual norm {residual_norm:.3g})")
