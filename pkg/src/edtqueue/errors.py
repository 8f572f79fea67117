"""Exception hierarchy shared by the analytic and simulation layers."""


class EdtError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EdtError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericFailure(EdtError, ArithmeticError):
    """A series, recurrence or quadrature could not meet its accuracy contract."""


class InstabilityError(DomainError):
    """The queue is unstable for the requested mean interarrival time."""

    def __init__(self, psi, bound):
        self.psi = psi
        self.bound = bound
        super().__init__(
            f"unstable queue: psi={psi!r} must exceed E[ST_Type1]={bound!r} "
            f"(with relative margin 1e-9)"
        )


class SimulationError(EdtError, RuntimeError):
    """The discrete-event simulator exhausted its event budget."""
