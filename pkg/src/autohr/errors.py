"""Exception types raised across the package."""


class AutoHRError(Exception):
    """Base class for all package errors."""


class InvalidBandError(AutoHRError, ValueError):
    pass


class NoPeakError(AutoHRError, ValueError):
    pass


class DegenerateVarianceError(AutoHRError, ValueError):
    pass


class InvalidLabelError(AutoHRError, ValueError):
    pass


class ShapeError(AutoHRError, ValueError):
    pass


class TooShortError(AutoHRError, ValueError):
    pass


class InvalidCellError(AutoHRError, ValueError):
    pass


class NonFiniteLossError(AutoHRError, RuntimeError):
    """Raised when an optimization step produces a NaN/inf loss.

    The offending value is kept on ``loss`` so callers can report it.
    """

    def __init__(self, loss, context=""):
        self.loss = float(loss)
        msg = f"non-finite loss {self.loss!r}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)
