"""Exception types raised by the library."""


class SpinQslError(Exception):
    """Base class for all library errors."""


class InvalidSpin(SpinQslError, ValueError):
    pass


class DimensionMismatch(SpinQslError, ValueError):
    pass


class DivergentInput(SpinQslError, ValueError):
    pass


class InvalidGrid(SpinQslError, ValueError):
    pass


class NotApplicable(SpinQslError):
    """The requested closed form is not valid in this parameter regime."""


class DegenerateVector(SpinQslError, ValueError):
    pass


class NotClosed(SpinQslError, ValueError):
    pass


class NotPureState(SpinQslError, ValueError):
    pass


class InsufficientCoverage(SpinQslError, ValueError):
    pass


class BoundViolation(SpinQslError):
    """A speed-limit inequality failed on dynamics where it is expected to hold."""


class ConfigError(SpinQslError, ValueError):
    pass
