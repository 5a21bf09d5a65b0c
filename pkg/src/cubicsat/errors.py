"""Exception types raised across the package."""

from __future__ import annotations


class CubicSatError(ValueError):
    """Base class for input errors (CLI exit code 1)."""


class EmptyRangeError(CubicSatError):
    pass


class UndefinedInputError(CubicSatError):
    pass


class InvalidAssignmentError(CubicSatError):
    """Prime assignment does not satisfy the surface constraint."""


class DistinctnessError(InvalidAssignmentError):
    pass


class InconsistentTargetError(CubicSatError):
    """Interval centres violate the family relation beyond tolerance."""


class NotInUError(CubicSatError):
    """The target point is off the surface or on a degenerate locus."""


class ConfigError(CubicSatError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
