#!/usr/bin/env python3
"""
FM-OLS Estimator for MultiCoint
Fully modified least squares with endogeneity and serial correlation
corrections for triangular cointegrated systems

Version: 1.0.0
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .errors import DomainError
from .kernels import KernelSpec
from .lrcov import LongRunEstimates, estimate_longrun
from .series import (DEFAULT_RCOND, SystemData, TimeSeriesMatrix, as_array,
                     ols, regression_residuals, solve_spd)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FmolsFit:
    """
    FM-OLS estimate together with every intermediate inference needs
    """
    A_plus: np.ndarray
    A_ols: np.ndarray
    lr: LongRunEstimates
    delta_plus_0x: np.ndarray
    y_plus: TimeSeriesMatrix
    residuals_cond: TimeSeriesMatrix
    residuals_ols: TimeSeriesMatrix
    xtx: np.ndarray
    intercept_used: bool
    K_used: float
    kernel: KernelSpec
    T: int

    @property
    def m0(self) -> int:
        return self.A_plus.shape[0]

    @property
    def mx(self) -> int:
        return self.A_plus.shape[1]

    @property
    def omega_cond(self) -> np.ndarray:
        return self.lr.omega_cond

    @property
    def F(self) -> np.ndarray:
        return self.lr.F

    def summary(self) -> 'FitSummary':
        return FitSummary(A_plus=self.A_plus, omega_cond=self.omega_cond, xtx=self.xtx,
                          T=self.T, kernel=self.kernel.name, K=self.K_used,
                          intercept=self.intercept_used, omega_00=self.lr.omega_00)

    def to_dict(self) -> Dict[str, Any]:
        """
        JSON-friendly fit report

        Returns:
            Dictionary with the estimate, long run blocks and rank diagnostic
        """
        directions = self.lr.conditional_directions()
        report = self.summary().to_dict()
        report.update({
            'A_ols': self.A_ols.tolist(),
            'F': self.F.tolist(),
            'delta_plus_0x': self.delta_plus_0x.tolist(),
            'omega_0x': self.lr.omega_0x.tolist(),
            'omega_xx': self.lr.omega_xx.tolist(),
            'omega_cond_eigenvalues': directions.eigenvalues.tolist(),
            'rank_diagnostic': directions.r,
        })
        return report


@dataclass(frozen=True)
class FitSummary:
    """
    The parts of a fit that Wald tests need, restorable from JSON
    """
    A_plus: np.ndarray
    omega_cond: np.ndarray
    xtx: np.ndarray
    T: int
    kernel: str = 'parzen'
    K: float = 0.0
    intercept: bool = False
    # scale for rank decisions; older reports without it fall back to Omega_00.x itself
    omega_00: Optional[np.ndarray] = None

    def to_dict(self) -> Dict[str, Any]:
        report = {
            'A_plus': np.asarray(self.A_plus).tolist(),
            'omega_cond': np.asarray(self.omega_cond).tolist(),
            'xtx': np.asarray(self.xtx).tolist(),
            'T': self.T,
            'kernel': self.kernel,
            'K': self.K,
            'intercept': self.intercept,
        }
        if self.omega_00 is not None:
            report['omega_00'] = np.asarray(self.omega_00).tolist()
        return report

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'FitSummary':
        """
        Rebuild a summary from a fit report

        Args:
            payload: Dictionary produced by to_dict (extra keys ignored)

        Returns:
            FitSummary
        """
        try:
            return cls(A_plus=np.atleast_2d(np.array(payload['A_plus'], dtype=float)),
                       omega_cond=np.atleast_2d(np.array(payload['omega_cond'], dtype=float)),
                       xtx=np.atleast_2d(np.array(payload['xtx'], dtype=float)),
                       T=int(payload['T']),
                       kernel=payload.get('kernel', 'parzen'),
                       K=float(payload.get('K', 0.0)),
                       intercept=bool(payload.get('intercept', False)),
                       omega_00=(np.atleast_2d(np.array(payload['omega_00'], dtype=float))
                                 if payload.get('omega_00') is not None else None))
        except KeyError as e:
            raise DomainError(f"fit report is missing field {e}")


def fm_ols(data: SystemData, kernel: KernelSpec, K: float, intercept: bool = False,
           rcond: float = DEFAULT_RCOND,
           override_corrections: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> FmolsFit:
    """
    Fully modified OLS estimate of A in y_t = A x_t + u_0t

    Pipeline: optional demeaning, OLS residuals, kernel estimates from
    (u_0t', dx_t')', y+_t = y_t - F dx_t, Delta+_0x = Delta_0x - F Delta_xx,
    A+ = (Y+'X - T Delta+_0x)(X'X)^-1.

    Args:
        data: Observed system
        kernel: Kernel for the long run estimates
        K: Bandwidth (> 0)
        intercept: Demean y and x before estimation
        rcond: Condition cutoff for X'X and Omega_xx
        override_corrections: (F, Delta+_0x) to use instead of the estimated
            corrections; a diagnostic hook, zeros reduce A+ to OLS

    Returns:
        FmolsFit
    """
    if not K > 0:
        raise DomainError(f"bandwidth must be positive, got {K}")
    T = data.T
    if T <= data.mx + (1 if intercept else 0):
        raise DomainError(f"T = {T} too small for {data.mx} regressors")

    y = as_array(data.y)
    x = as_array(data.x)
    dx = data.delta_x
    if intercept:
        y = y - y.mean(axis=0)
        x = x - x.mean(axis=0)

    xtx = x.T @ x
    A_ols = ols(y, x, rcond)
    u0 = regression_residuals(y, x, A_ols)
    lr = estimate_longrun(np.hstack([u0, dx]), kernel, K, data.m0, rcond)

    if override_corrections is None:
        F = lr.F
        delta_plus_0x = lr.delta_0x - F @ lr.delta_xx
    else:
        F = np.asarray(override_corrections[0], dtype=float).reshape(data.m0, data.mx)
        delta_plus_0x = np.asarray(override_corrections[1], dtype=float).reshape(data.m0, data.mx)

    y_plus = y - dx @ F.T
    A_plus = solve_spd(xtx, x.T @ y_plus - T * delta_plus_0x.T, rcond, what="X'X").T
    residuals_cond = u0 - dx @ F.T

    logger.debug("FM-OLS T=%d K=%.4f A+=%s", T, K, A_plus.ravel())
    return FmolsFit(A_plus=A_plus, A_ols=A_ols, lr=lr, delta_plus_0x=delta_plus_0x,
                    y_plus=TimeSeriesMatrix(y_plus), residuals_cond=TimeSeriesMatrix(residuals_cond),
                    residuals_ols=TimeSeriesMatrix(u0), xtx=xtx, intercept_used=intercept,
                    K_used=float(K), kernel=kernel, T=T)


def conditional_residuals(fit: FmolsFit) -> TimeSeriesMatrix:
    """
    Augmented-regression residuals u_0.x,t = u_0t - F dx_t

    Args:
        fit: FM-OLS fit

    Returns:
        T x m0 matrix
    """
    return fit.residuals_cond
