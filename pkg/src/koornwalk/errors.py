"""Exception types raised by koornwalk."""


class KoornwalkError(Exception):
    """Base class for all library errors."""


class SingularSystem(KoornwalkError, ArithmeticError):
    """The linear system for recurrence coefficients is numerically singular."""

    def __init__(self, site, cond):
        self.site = site
        self.cond = cond
        super().__init__(f"singular coefficient system at n={site} (cond={cond:.3g})")


class NotStabilized(KoornwalkError, ArithmeticError):
    pass


class NegativeEntry(KoornwalkError, ValueError):
    """A shifted transition probability is negative (lambda below threshold)."""

    def __init__(self, site, which, value):
        self.site = site
        self.which = which
        self.value = value
        super().__init__(
            f"negative transition probability at site {site}: {which}_{site} = {value:.6g}; "
            "lambda is below lambda_min"
        )


class Underflow(KoornwalkError, ArithmeticError):
    pass


class NotPositiveRecurrent(KoornwalkError, ValueError):
    pass


class DegreeTooLarge(KoornwalkError, ValueError):
    pass


class TruncationTooSmall(KoornwalkError, ValueError):
    pass


class NotMixedByCap(KoornwalkError, RuntimeError):
    pass


class InsufficientRange(KoornwalkError, ValueError):
    pass
