"""Exception hierarchy shared by every module of the package."""


class EFCError(Exception):
    """Base class for all errors raised by universal_efc."""

    #: exit status used by the command line front-end
    exit_code = 1


class ConfigError(EFCError, ValueError):
    """Invalid parameter or configuration value."""

    exit_code = 2


class ParseError(EFCError, ValueError):
    """Malformed input file. ``line`` is 1-based and includes the header."""

    exit_code = 2

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ConflictError(ParseError):
    """The same (country, activity, year) triple appears with two values."""


class DomainError(ParseError):
    """A value is outside its admissible domain (e.g. a negative export)."""


class AxisCollisionError(EFCError, ValueError):
    """Two panels that must be disjoint share activity codes."""


class EmptyIntersectionError(EFCError, ValueError):
    """An axis intersection came out empty."""


class AlignmentError(EFCError, ValueError):
    """Label axes of two objects do not match."""


class StructureError(EFCError, ValueError):
    """Invalid structure: cycles, multiple parents, zero rows in a matrix..."""


class LayerError(StructureError):
    """Layer index of a taxonomy node is inconsistent with its parent."""


class CoverageError(StructureError):
    """The complete set does not partition the taxonomy leaves."""


class KindError(EFCError, TypeError):
    """A competitiveness matrix of the wrong kind was supplied."""


class DegenerateSliceError(EFCError, ValueError):
    """A yearly slice has no exports at all."""

    def __init__(self, message, year=None):
        self.year = year
        super().__init__(message)


class FitError(EFCError, RuntimeError):
    """A numerical fit did not converge."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class RangeError(EFCError, ValueError):
    """No usable (t, t + delta) pair in the available years."""


class EvaluationSetError(EFCError, ValueError):
    """No fully observed data to benchmark the imputers on."""


class InsufficientDataError(EFCError, ValueError):
    """Not enough observations for the requested statistic."""
