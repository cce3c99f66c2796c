"""Exception hierarchy shared by every module."""


class DgeoError(Exception):
    """Base class for all library errors."""


# -- expression language ------------------------------------------------------


class ParseError(DgeoError):
    """Malformed formula text."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset
        self.text = text


class ExprSyntaxError(ParseError):
    pass


class UnknownIdentifier(ParseError):
    pass


class SceneError(DgeoError):
    """Invalid scene or curve file."""


# -- numerical failures ---------------------------------------------------------


class NumericalError(DgeoError):
    """A quantity is undefined or numerically degenerate at the requested point."""

    def __init__(self, message: str = "", t=None):
        super().__init__(message if t is None else f"{message} (t={t!r})")
        self.t = t


class DomainError(NumericalError):
    pass


class SingularPoint(NumericalError):
    pass


class Umbilic(NumericalError):
    pass


class NoRealDirection(NumericalError):
    pass


class PlanarPoint(NumericalError):
    pass


class ZeroSpeed(NumericalError):
    pass


class OutOfRange(NumericalError):
    pass


class FlatPoint(NumericalError):
    pass


class FrameDegenerate(NumericalError):
    pass


class InsufficientOrder(NumericalError):
    pass


class DegeneratePartner(NumericalError):
    pass


class NearSingularFormula(NumericalError):
    pass


class LeftDomain(NumericalError):
    pass


class UmbilicEncountered(NumericalError):
    pass


class ParabolicEncountered(NumericalError):
    pass


class AmbiguousDirection(NumericalError):
    pass
