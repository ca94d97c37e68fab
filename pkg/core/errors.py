#!/usr/bin/env python3
"""
Exception hierarchy for MultiCoint
Every failure raised by the estimation, simulation and data layers

Version: 1.0.0
"""

from typing import Optional


class MultiCointError(Exception):
    """
    Base class for all errors raised by the library
    """


class DomainError(MultiCointError, ValueError):
    """
    Argument outside the domain of an operation (lag, bandwidth, exponent...)
    """


class SingularDesignError(MultiCointError, ValueError):
    """
    A matrix that must be inverted is numerically singular
    """

    def __init__(self, message: str, rcond: float = 0.0):
        """
        Initialize singular design error

        Args:
            message: Description of the failing solve
            rcond: Reciprocal condition number that was observed
        """
        super().__init__(f"{message} (rcond={rcond:.3e})")
        self.rcond = rcond


class DegenerateVarianceError(MultiCointError, ValueError):
    """
    Conditional long run variance (or a Wald middle matrix) is degenerate
    """

    def __init__(self, message: str, effective_rank: Optional[int] = None):
        """
        Initialize degenerate variance error

        Args:
            message: Diagnostic message
            effective_rank: Numerical rank that was detected, if known
        """
        if effective_rank is not None:
            message = f"{message} (effective rank {effective_rank})"
        super().__init__(message)
        self.effective_rank = effective_rank


class AsymmetryError(MultiCointError, ValueError):
    """
    A matrix expected to be symmetric is not
    """


class DataFormatError(MultiCointError, ValueError):
    """
    Input file could not be parsed or validated
    """

    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None):
        """
        Initialize data format error

        Args:
            message: What went wrong
            path: Offending file
            line: 1-based line number in the file
        """
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line
