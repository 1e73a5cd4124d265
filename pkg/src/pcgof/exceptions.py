"""Exception hierarchy for the package."""


class PcgofError(Exception):
    """Base class for all errors raised by pcgof."""


class SchemeError(PcgofError, ValueError):
    """Invalid progressive censoring scheme."""


class SchemeInconsistent(SchemeError):
    """m + sum(r) does not equal n."""


class SchemeInfeasible(SchemeError):
    """A removal exceeds the number of units still on test."""


class EmptyScheme(SchemeError):
    """A scheme with no observed failures."""


class IndivisibleM(SchemeError):
    """Scheme family 4 needs m to be a multiple of 5."""


class DomainError(PcgofError, ValueError):
    """Argument outside the mathematical domain of a function."""


class DegenerateSample(PcgofError, ValueError):
    """Sample cannot be fitted (too few points or zero spread)."""


class NonConvergence(PcgofError, RuntimeError):
    """Optimizer hit its iteration cap."""


class DegenerateDenominator(PcgofError, ZeroDivisionError):
    """Statistic denominator vanishes."""


class ParseError(PcgofError, ValueError):
    """Malformed input file or argument.

    Parameters
    ----------
    message : str
        Description of the problem.
    line : int, optional
        1-based line number in the offending file.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
