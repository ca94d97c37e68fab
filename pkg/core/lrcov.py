#!/usr/bin/env python3
"""
Long Run Covariance Estimation for MultiCoint
Kernel estimates of Omega and Delta, their partitions, the conditional long
run covariance and its singular directions

Version: 1.0.0
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import AsymmetryError, DomainError
from .kernels import KernelSpec, kernel_weights
from .series import DEFAULT_RCOND, ArrayLike, as_array, lag_autocovariance, solve_spd

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-8
DEFAULT_ABS_FLOOR = 1e-12


def _max_lag(kernel: KernelSpec, K: float, T: int) -> int:
    """Largest lag with a possibly nonzero weight"""
    if math.isinf(kernel.support):
        return T - 1
    return min(T - 1, int(math.ceil(K * kernel.support)) - 1)


def _weighted_sums(u: ArrayLike, kernel: KernelSpec, K: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gamma(0) and the one-sided weighted sum sum_{j>=0} w(j/K) Gamma(j)
    """
    if not K > 0:
        raise DomainError(f"bandwidth must be positive, got {K}")
    values = as_array(u)
    T = values.shape[0]
    gamma0 = lag_autocovariance(values, 0)
    delta = gamma0.copy()
    last = _max_lag(kernel, K, T)
    if last >= 1:
        weights = kernel_weights(kernel, np.arange(1, last + 1) / K)
        for j, weight in enumerate(weights, start=1):
            if weight != 0.0:
                delta = delta + weight * lag_autocovariance(values, j)
    return gamma0, delta


def onesided_longrun_cov(u: ArrayLike, kernel: KernelSpec, K: float) -> np.ndarray:
    """
    One-sided long run covariance Delta = sum_{j=0}^{T-1} w(j/K) Gamma(j)

    Args:
        u: T x m series
        kernel: Kernel specification
        K: Bandwidth (> 0)

    Returns:
        m x m matrix (not symmetric in general)
    """
    return _weighted_sums(u, kernel, K)[1]


def longrun_cov(u: ArrayLike, kernel: KernelSpec, K: float) -> np.ndarray:
    """
    Long run covariance Omega = sum_{|j|<T} w(j/K) Gamma(j)

    Computed as Delta + Delta' - Gamma(0), which is the same sum because w
    is even with w(0) = 1.

    Args:
        u: T x m series
        kernel: Kernel specification
        K: Bandwidth (> 0)

    Returns:
        Symmetric m x m matrix
    """
    gamma0, delta = _weighted_sums(u, kernel, K)
    return delta + delta.T - gamma0


def schur_complement(omega: np.ndarray, m0: int,
                     rcond: float = DEFAULT_RCOND) -> Tuple[np.ndarray, np.ndarray]:
    """
    Conditional block Omega_00 - Omega_0x Omega_xx^-1 Omega_x0

    Args:
        omega: m x m symmetric matrix
        m0: Size of the leading block
        rcond: Condition cutoff for Omega_xx

    Returns:
        (Omega_00.x, F = Omega_0x Omega_xx^-1)
    """
    omega = np.asarray(omega, dtype=float)
    omega_00 = omega[:m0, :m0]
    omega_0x = omega[:m0, m0:]
    omega_xx = omega[m0:, m0:]
    F = solve_spd(omega_xx, omega_0x.T, rcond, what="Omega_xx").T
    conditional = omega_00 - F @ omega_0x.T
    return 0.5 * (conditional + conditional.T), F


@dataclass(frozen=True)
class LongRunEstimates:
    """
    Kernel estimates of Omega, Delta and Gamma(0) partitioned as (m0 | mx)
    """
    omega: np.ndarray
    delta: np.ndarray
    gamma0: np.ndarray
    m0: int
    kernel: KernelSpec
    K: float
    rcond: float = DEFAULT_RCOND

    @property
    def omega_00(self) -> np.ndarray:
        return self.omega[:self.m0, :self.m0]

    @property
    def omega_0x(self) -> np.ndarray:
        return self.omega[:self.m0, self.m0:]

    @property
    def omega_xx(self) -> np.ndarray:
        return self.omega[self.m0:, self.m0:]

    @property
    def delta_0x(self) -> np.ndarray:
        return self.delta[:self.m0, self.m0:]

    @property
    def delta_xx(self) -> np.ndarray:
        return self.delta[self.m0:, self.m0:]

    @cached_property
    def _conditional(self) -> Tuple[np.ndarray, np.ndarray]:
        return schur_complement(self.omega, self.m0, self.rcond)

    @property
    def omega_cond(self) -> np.ndarray:
        """Omega_00.x"""
        return self._conditional[0]

    @property
    def F(self) -> np.ndarray:
        """Long run regression coefficient Omega_0x Omega_xx^-1"""
        return self._conditional[1]

    def conditional_directions(self, tol: float = DEFAULT_RANK_TOL) -> 'SingularDirections':
        """
        Singular directions of Omega_00.x, with the zero floor set by Omega_00

        Args:
            tol: Relative eigenvalue tolerance

        Returns:
            SingularDirections
        """
        scale = float(linalg.eigvalsh(0.5 * (self.omega_00 + self.omega_00.T))[-1])
        return singular_directions(self.omega_cond, tol, tol * max(scale, 0.0))

    def to_dict(self) -> Dict[str, Any]:
        """
        JSON-friendly dump of the estimates

        Returns:
            Dictionary of nested lists
        """
        directions = self.conditional_directions()
        return {
            'kernel': self.kernel.name,
            'K': self.K,
            'm0': self.m0,
            'omega': self.omega.tolist(),
            'delta': self.delta.tolist(),
            'gamma0': self.gamma0.tolist(),
            'omega_cond': self.omega_cond.tolist(),
            'F': self.F.tolist(),
            'omega_eigenvalues': linalg.eigvalsh(self.omega)[::-1].tolist(),
            'omega_cond_eigenvalues': directions.eigenvalues.tolist(),
            'rank_diagnostic': directions.r,
        }


def estimate_longrun(u: ArrayLike, kernel: KernelSpec, K: float, m0: int,
                     rcond: float = DEFAULT_RCOND) -> LongRunEstimates:
    """
    Estimate Omega, Delta and Gamma(0) from one pass over the autocovariances

    Args:
        u: T x m series (u_0t' , u_xt')'
        kernel: Kernel specification
        K: Bandwidth
        m0: Number of leading (regressand) columns
        rcond: Condition cutoff used for Omega_xx

    Returns:
        LongRunEstimates
    """
    gamma0, delta = _weighted_sums(u, kernel, K)
    omega = delta + delta.T - gamma0
    return LongRunEstimates(omega=omega, delta=delta, gamma0=gamma0, m0=m0,
                            kernel=kernel, K=float(K), rcond=rcond)


def conditional_lrcov(est: LongRunEstimates) -> np.ndarray:
    """
    Conditional long run covariance Omega_00.x (F is cached alongside)

    Args:
        est: Long run estimates

    Returns:
        m0 x m0 matrix
    """
    return est.omega_cond


@dataclass(frozen=True)
class SingularDirections:
    """
    Eigen-split of Omega_00.x = R R' with the null directions R_perp
    """
    r: int
    R: np.ndarray
    R_perp: np.ndarray
    eigenvalues: np.ndarray


def _symmetric_eigen(matrix: np.ndarray, atol: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    if matrix.size and np.max(np.abs(matrix - matrix.T)) > atol * scale:
        raise AsymmetryError("matrix is not symmetric")
    eigenvalues, vectors = linalg.eigh(0.5 * (matrix + matrix.T))
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues, vectors = eigenvalues[order], vectors[:, order]
    # deterministic sign: largest component of each eigenvector positive
    for i in range(vectors.shape[1]):
        pivot = np.argmax(np.abs(vectors[:, i]))
        if vectors[pivot, i] < 0:
            vectors[:, i] = -vectors[:, i]
    return eigenvalues, vectors


def numerical_rank(matrix: np.ndarray, tol: float = DEFAULT_RANK_TOL,
                   abs_floor: float = DEFAULT_ABS_FLOOR, scale: Optional[float] = None) -> int:
    """
    Count eigenvalues above tol * scale (scale defaults to the largest one)

    Args:
        matrix: Symmetric matrix
        tol: Relative tolerance
        abs_floor: Rank is zero when the reference scale is below this
        scale: Reference magnitude, if not the matrix's own largest eigenvalue

    Returns:
        Numerical rank
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0:
        return 0
    eigenvalues = linalg.eigvalsh(0.5 * (matrix + matrix.T))
    reference = eigenvalues[-1] if scale is None else scale
    if reference <= abs_floor:
        return 0
    return int(np.sum(eigenvalues > tol * reference))


def singular_directions(omega_cond: np.ndarray, tol: float = DEFAULT_RANK_TOL,
                        abs_floor: float = DEFAULT_ABS_FLOOR) -> SingularDirections:
    """
    Split Omega_00.x into its retained factor R and null directions R_perp

    The rank r counts eigenvalues above tol * lambda_max, and is zero when
    lambda_max is below abs_floor. Estimating r is a diagnostic: the theory
    treats r as known.

    Args:
        omega_cond: m0 x m0 symmetric PSD matrix
        tol: Relative eigenvalue tolerance
        abs_floor: Absolute floor on lambda_max

    Returns:
        SingularDirections with R R' reproducing the retained part
    """
    eigenvalues, vectors = _symmetric_eigen(np.atleast_2d(omega_cond))
    m0 = eigenvalues.shape[0]
    largest = eigenvalues[0] if m0 else 0.0
    if largest <= abs_floor:
        r = 0
    else:
        r = int(np.sum(eigenvalues > tol * largest))
    R = vectors[:, :r] * np.sqrt(eigenvalues[:r])
    R_perp = vectors[:, r:]
    return SingularDirections(r=r, R=R, R_perp=R_perp, eigenvalues=eigenvalues)
