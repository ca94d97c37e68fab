#!/usr/bin/env python3
"""
Time Series Core for MultiCoint
Containers, sample autocovariances, partial sums and the OLS estimator

Version: 1.0.0
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import linalg

from .errors import DataFormatError, DomainError, SingularDesignError

logger = logging.getLogger(__name__)

# Relative condition cutoff for every symmetric positive definite solve
DEFAULT_RCOND = 1e-12


@dataclass(frozen=True)
class TimeSeriesMatrix:
    """
    T x m matrix of observations, rows indexed by time t = 1..T
    """
    data: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        values = np.array(self.data, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise DomainError(f"expected a 2-D array, got {values.ndim} dimensions")
        if values.shape[0] < 2 or values.shape[1] < 1:
            raise DomainError(f"need T >= 2 and m >= 1, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("time series contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, 'data', values)

        if self.labels is not None:
            labels = tuple(str(label) for label in self.labels)
            if len(labels) != values.shape[1]:
                raise DomainError(
                    f"{len(labels)} labels for {values.shape[1]} columns")
            object.__setattr__(self, 'labels', labels)

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.T

    def columns(self, indices: Sequence[int]) -> 'TimeSeriesMatrix':
        """
        Select a subset of columns

        Args:
            indices: Column positions to keep

        Returns:
            New matrix with the selected columns
        """
        labels = None
        if self.labels is not None:
            labels = tuple(self.labels[i] for i in indices)
        return TimeSeriesMatrix(self.data[:, list(indices)], labels)


ArrayLike = Union[TimeSeriesMatrix, np.ndarray, Sequence]


def as_array(series: ArrayLike) -> np.ndarray:
    """
    Return a 2-D float view of a series container or array

    Args:
        series: TimeSeriesMatrix or array-like

    Returns:
        2-D numpy array (T x m)
    """
    if isinstance(series, TimeSeriesMatrix):
        return series.data
    values = np.asarray(series, dtype=float)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    return values


@dataclass(frozen=True)
class SystemData:
    """
    Observed triangular system: y_t = A x_t + u_0t, x_t = x_{t-1} + u_xt
    """
    y: TimeSeriesMatrix
    x: TimeSeriesMatrix
    x0: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if not isinstance(self.y, TimeSeriesMatrix):
            object.__setattr__(self, 'y', TimeSeriesMatrix(self.y))
        if not isinstance(self.x, TimeSeriesMatrix):
            object.__setattr__(self, 'x', TimeSeriesMatrix(self.x))
        if self.y.T != self.x.T:
            raise DomainError(f"y has {self.y.T} rows but x has {self.x.T}")

        if self.x0 is None:
            x0 = np.zeros(self.x.m)
        else:
            x0 = np.array(self.x0, dtype=float).reshape(-1)
            if x0.shape[0] != self.x.m:
                raise DomainError(f"x0 has length {x0.shape[0]}, expected {self.x.m}")
        x0.setflags(write=False)
        object.__setattr__(self, 'x0', x0)

    @property
    def T(self) -> int:
        return self.y.T

    @property
    def m0(self) -> int:
        return self.y.m

    @property
    def mx(self) -> int:
        return self.x.m

    @property
    def delta_x(self) -> np.ndarray:
        """Observed regressor increments u_xt = x_t - x_{t-1}, first row x_1 - x_0"""
        return as_array(first_difference(self.x, initial=self.x0))


def lag_autocovariance(u: ArrayLike, j: int) -> np.ndarray:
    """
    Sample autocovariance at lag j without demeaning

    Gamma(j) = T^-1 sum_{1 <= t, t+j <= T} u_{t+j} u_t'. The divisor is T
    for every lag, never T - j.

    Args:
        u: T x m series
        j: Lag, |j| < T

    Returns:
        m x m matrix
    """
    values = as_array(u)
    T = values.shape[0]
    j = int(j)
    if abs(j) >= T:
        raise DomainError(f"lag {j} outside |j| < T = {T}")

    if j < 0:
        return lag_autocovariance(values, -j).T
    if j == 0:
        gamma = values.T @ values / T
        return 0.5 * (gamma + gamma.T)
    return values[j:].T @ values[:T - j] / T


def partial_sum(u: ArrayLike) -> TimeSeriesMatrix:
    """
    Partial sums U_t = sum_{s <= t} u_s

    Args:
        u: T x m series

    Returns:
        T x m matrix of cumulative sums
    """
    labels = u.labels if isinstance(u, TimeSeriesMatrix) else None
    return TimeSeriesMatrix(np.cumsum(as_array(u), axis=0), labels)


def first_difference(u: ArrayLike, initial: Optional[np.ndarray] = None) -> TimeSeriesMatrix:
    """
    First differences with an explicit initial value

    Args:
        u: T x m series
        initial: Value at t = 0 (defaults to zero, so row 1 is u_1)

    Returns:
        T x m matrix of differences
    """
    values = as_array(u)
    if initial is None:
        initial = np.zeros(values.shape[1])
    prepend = np.asarray(initial, dtype=float).reshape(1, -1)
    labels = u.labels if isinstance(u, TimeSeriesMatrix) else None
    return TimeSeriesMatrix(np.diff(values, axis=0, prepend=prepend), labels)


def solve_spd(matrix: np.ndarray, rhs: np.ndarray, rcond: float = DEFAULT_RCOND,
              what: str = "matrix") -> np.ndarray:
    """
    Solve matrix @ z = rhs for a symmetric positive definite matrix

    No regularization is ever applied: a reciprocal condition number at or
    below rcond raises instead.

    Args:
        matrix: Symmetric positive definite matrix
        rhs: Right-hand side (vector or matrix)
        rcond: Relative eigenvalue cutoff
        what: Name used in the error message

    Returns:
        Solution z
    """
    sym = np.asarray(matrix, dtype=float)
    sym = 0.5 * (sym + sym.T)
    eigenvalues = linalg.eigvalsh(sym)
    largest = eigenvalues[-1]
    observed = eigenvalues[0] / largest if largest > 0 else 0.0
    if largest <= 0 or observed <= rcond:
        raise SingularDesignError(f"{what} is numerically singular", rcond=observed)
    factor = linalg.cho_factor(sym)
    return linalg.cho_solve(factor, rhs)


def ols(y: ArrayLike, x: ArrayLike, rcond: float = DEFAULT_RCOND) -> np.ndarray:
    """
    Least squares coefficient matrix A = Y'X (X'X)^-1

    Args:
        y: T x m0 regressand
        x: T x mx regressors
        rcond: Condition cutoff for X'X

    Returns:
        m0 x mx coefficient matrix
    """
    y_values, x_values = as_array(y), as_array(x)
    if y_values.shape[0] != x_values.shape[0]:
        raise DomainError("y and x must have the same number of rows")
    xtx = x_values.T @ x_values
    return solve_spd(xtx, x_values.T @ y_values, rcond, what="X'X").T


def regression_residuals(y: ArrayLike, x: ArrayLike, coefficients: np.ndarray) -> np.ndarray:
    """
    Residuals y_t - A x_t

    Args:
        y: T x m0 regressand
        x: T x mx regressors
        coefficients: m0 x mx matrix A

    Returns:
        T x m0 residual array
    """
    return as_array(y) - as_array(x) @ np.asarray(coefficients).T


def read_matrix_csv(path: Union[str, Path]) -> TimeSeriesMatrix:
    """
    Read a T x m matrix from CSV (optional header row, one row per t)

    Args:
        path: CSV file path

    Returns:
        Parsed matrix, labelled when a header is present
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFormatError(f"cannot read matrix: {e}", path=str(path))

    rows = frame.values.tolist()
    labels = None
    first_line = 1
    if rows and not _is_numeric_row(rows[0]):
        labels = tuple(str(cell).strip() for cell in rows[0])
        rows = rows[1:]
        first_line = 2

    parsed = []
    for offset, row in enumerate(rows):
        try:
            parsed.append([float(cell) for cell in row])
        except (TypeError, ValueError):
            raise DataFormatError(f"non-numeric value in row {row}",
                                  path=str(path), line=first_line + offset)
    if not parsed:
        raise DataFormatError("no data rows", path=str(path))
    return TimeSeriesMatrix(np.array(parsed), labels)


def write_matrix_csv(series: TimeSeriesMatrix, path: Union[str, Path]) -> None:
    """
    Write a matrix to CSV with 17 significant digits (exact round-trip)

    Args:
        series: Matrix to write
        path: Destination file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = series.labels or [f"v{i + 1}" for i in range(series.m)]
    frame = pd.DataFrame(series.data, columns=list(labels))
    frame.to_csv(path, index=False, float_format='%.17g')
    logger.debug("wrote %d x %d matrix to %s", series.T, series.m, path)


def _is_numeric_row(row: Sequence) -> bool:
    try:
        [float(cell) for cell in row]
    except (TypeError, ValueError):
        return False
    return True
