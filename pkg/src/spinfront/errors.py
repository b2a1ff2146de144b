"""Exception hierarchy shared by all modules."""


class SpinfrontError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(SpinfrontError, ValueError):
    """Invalid parameters, grids or scenario descriptions."""


class EvaluationOverflowError(SpinfrontError, ArithmeticError):
    pass


class FormulaTranscriptionError(SpinfrontError):
    """Closed-form derivatives disagree with the finite-difference oracle."""


class DegeneratePoleError(SpinfrontError, ArithmeticError):
    """The third spin component reached +-1 where a division by 1 - v3^2 is needed."""


class JunctionPointError(SpinfrontError, ValueError):
    pass


class StabilityError(SpinfrontError):
    """Explicit time step exceeds the stability bound."""


class DivergenceError(SpinfrontError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class BlowUpError(DivergenceError):
    pass


class ExtinctFrontError(SpinfrontError):
    """The front is empty (the extinction time has been reached)."""


class DerivationError(SpinfrontError, ArithmeticError):
    """Two algebraic routes to the same reaction term disagree."""
