"""Exception hierarchy. Everything raised on bad domain input derives from NeedlecastError."""


class NeedlecastError(Exception):
    pass


class NonVisibleNormal(NeedlecastError, ValueError):
    pass


class InvalidMax(NeedlecastError, ValueError):
    pass


class AllDark(NeedlecastError, ValueError):
    pass


class TooSmall(NeedlecastError, ValueError):
    pass


class EmptyDb(NeedlecastError, ValueError):
    pass


class MixedMode(NeedlecastError, ValueError):
    pass


class MissingBorder(NeedlecastError, ValueError):
    pass


class NoObject(NeedlecastError, ValueError):
    pass


class OpenContour(NeedlecastError, ValueError):
    pass


class Starved(NeedlecastError, RuntimeError):
    """Unassigned pixels remain but none has its three stencil neighbours known."""

    def __init__(self, message, needle_map=None):
        super().__init__(message)
        self.needle_map = needle_map


class NotConverged(NeedlecastError, RuntimeError):
    """Iteration cap reached. ``result`` holds the partial integration."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DimensionMismatch(NeedlecastError, ValueError):
    pass


class NoSolvedPixels(NeedlecastError, ValueError):
    pass


class MalformedHeader(NeedlecastError, ValueError):
    pass


class TruncatedData(NeedlecastError, ValueError):
    pass


class NonFiniteValue(NeedlecastError, ValueError):
    pass
