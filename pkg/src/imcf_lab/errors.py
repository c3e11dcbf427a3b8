"""Exception hierarchy shared by all modules."""


class ImcfLabError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ImcfLabError, ValueError):
    """Evaluation point outside [r_min, inf) or an invalid angle."""


class NonPositiveWarping(ImcfLabError, ValueError):
    pass


class InconsistencyError(ImcfLabError, RuntimeError):
    """Two independent assembly routes for the same quantity disagree."""


class StepTooLarge(ImcfLabError, RuntimeError):
    """Richardson consistency check of a finite-difference oracle failed."""


class DegeneratePotential(ImcfLabError, ZeroDivisionError):
    pass


class FlowHalt(ImcfLabError, RuntimeError):
    """A flow step could not be taken. Carries the flow time and a state dump."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class NonMeanConvex(FlowHalt):
    pass


class StarShapeLost(FlowHalt):
    pass


class CflViolation(FlowHalt):
    pass


class UnknownScenario(ImcfLabError, KeyError):
    pass


class ParamOutOfRange(ImcfLabError, ValueError):
    pass


class ParseError(ImcfLabError, ValueError):
    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key


class ValidationError(ImcfLabError, ValueError):
    def __init__(self, key, message=""):
        super().__init__(f"{key}: {message}" if message else key)
        self.key = key
