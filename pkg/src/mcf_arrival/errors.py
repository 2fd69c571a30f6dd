"""Exception types raised across the package.

Every error derives from :class:`MCFError` so callers (the CLI in
particular) can map whole families of failures to exit codes.
"""


class MCFError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(MCFError, ValueError):
    pass


class DomainTooSmallError(MCFError):
    """Zero level set reaches the boundary layer of the grid."""


class StencilError(MCFError, IndexError):
    """Index too close to the grid boundary for the requested stencil."""


class OutsideDomainError(MCFError, ValueError):
    pass


# numerical family (exit code 3)


class NumericalError(MCFError):
    pass


class StabilityError(NumericalError):
    pass


class NumericalBlowupError(NumericalError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class InvalidCrossingError(NumericalError, ValueError):
    pass


class NearCriticalError(NumericalError):
    """|grad u| below the floor; the arrival-time equation degenerates."""


class PartialFieldError(NumericalError):
    pass


class EmptyShellError(NumericalError):
    """No sample survived rejection on some sampling sphere."""


class MixedStratumError(NumericalError):
    def __init__(self, message, ks=()):
        super().__init__(message)
        self.ks = tuple(ks)


class NoInteriorMaxError(NumericalError):
    pass


class InsufficientDataError(NumericalError):
    pass


class PreconditionError(NumericalError, ValueError):
    pass


class IncompleteSweepError(MCFError):
    """t_max reached while positive nodes remain.

    The partially swept arrival field and the diagnostics are attached so
    callers can still inspect or persist them.
    """

    def __init__(self, message, arrival=None, diagnostics=None):
        super().__init__(message)
        self.arrival = arrival
        self.diagnostics = diagnostics


# shapes


class ShapeRejectedError(MCFError, ValueError):
    pass


class NotMeanConvexError(ShapeRejectedError):
    pass


class NoPinchError(ShapeRejectedError):
    pass


# io / config


class FormatError(MCFError):
    pass


class ConfigError(MCFError, ValueError):
    pass
