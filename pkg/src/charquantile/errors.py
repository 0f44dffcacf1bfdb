"""Exception hierarchy shared by every stage of the pipeline."""


class CharQuantileError(Exception):
    """Base class; the CLI maps these to exit code 2."""

    stage = "core"


class DomainError(CharQuantileError, ValueError):
    """Parameter outside the admissible range of a distribution or operation."""

    stage = "domain"


class ValidationError(CharQuantileError, ValueError):
    """A user-supplied characteristic function failed a probe."""

    stage = "validation"


class DivergenceError(CharQuantileError, ArithmeticError):
    """A requested characteristic moment does not exist."""

    stage = "moments"


class NonConvergenceError(CharQuantileError, ArithmeticError):
    stage = "quadrature"


class MissingSymbolError(CharQuantileError, KeyError):
    stage = "substitution"


class ResourceLimitError(CharQuantileError, MemoryError):
    stage = "diffring"


class DegenerateDensityError(CharQuantileError, ArithmeticError):
    stage = "series"


class ShapeError(CharQuantileError, ValueError):
    stage = "series"


class TableParseError(CharQuantileError, ValueError):
    stage = "diagnostics"
