#!/usr/bin/env python3
"""
Inference for MultiCoint
t and Wald statistics, rank-condition diagnostics and the hyperconsistency
rate delta(T)

Version: 1.0.0
"""

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np
from scipy import linalg, stats

from .errors import DegenerateVarianceError, DomainError
from .fmols import FitSummary, FmolsFit
from .lrcov import DEFAULT_RANK_TOL, numerical_rank

logger = logging.getLogger(__name__)

Fit = Union[FmolsFit, FitSummary]


def vec(matrix: np.ndarray) -> np.ndarray:
    """Row vectorization: rows of the matrix stacked one after another"""
    return np.asarray(matrix, dtype=float).reshape(-1)


@dataclass(frozen=True)
class LinearRestriction:
    """
    H0: Q vec(A) = r0
    """
    Q: np.ndarray
    r0: np.ndarray

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        r0 = np.asarray(self.r0, dtype=float).reshape(-1)
        if Q.shape[0] != r0.shape[0]:
            raise DomainError(f"Q has {Q.shape[0]} rows but r0 has {r0.shape[0]} entries")
        if np.linalg.matrix_rank(Q) != Q.shape[0]:
            raise DomainError("restriction matrix Q must have full row rank")
        object.__setattr__(self, 'Q', Q)
        object.__setattr__(self, 'r0', r0)

    @property
    def q(self) -> int:
        return self.Q.shape[0]


@dataclass(frozen=True)
class TensorRestriction:
    """
    H0: R1 A R2 = R3, equivalently (R1 kron R2') vec(A) = vec(R3)
    """
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray

    def __post_init__(self):
        R1 = np.atleast_2d(np.asarray(self.R1, dtype=float))
        R2 = np.atleast_2d(np.asarray(self.R2, dtype=float))
        R3 = np.atleast_2d(np.asarray(self.R3, dtype=float))
        if R3.shape != (R1.shape[0], R2.shape[1]):
            raise DomainError(f"R3 must be {R1.shape[0]} x {R2.shape[1]}, got {R3.shape}")
        object.__setattr__(self, 'R1', R1)
        object.__setattr__(self, 'R2', R2)
        object.__setattr__(self, 'R3', R3)

    @property
    def q(self) -> int:
        return self.R1.shape[0] * self.R2.shape[1]

    def as_linear(self) -> LinearRestriction:
        return LinearRestriction(np.kron(self.R1, self.R2.T), vec(self.R3))


@dataclass(frozen=True)
class GeneralRestriction:
    """
    H0: phi(vec(A)) = 0 with an optional analytic Jacobian
    """
    phi: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None


Restriction = Union[LinearRestriction, TensorRestriction, GeneralRestriction]


def full_restriction(A0: np.ndarray) -> TensorRestriction:
    """
    H0: A = A0 written in tensor form (R1 = I, R2 = I, R3 = A0)

    Args:
        A0: Hypothesized m0 x mx matrix

    Returns:
        TensorRestriction
    """
    A0 = np.atleast_2d(np.asarray(A0, dtype=float))
    m0, mx = A0.shape
    return TensorRestriction(np.eye(m0), np.eye(mx), A0)


@dataclass(frozen=True)
class RankDiagnosis:
    """
    Outcome of the rank condition check
    """
    q_nominal: int
    q_effective: int
    satisfied: bool


@dataclass(frozen=True)
class WaldResult:
    """
    Wald statistic with nominal and effective reference laws
    """
    statistic: float
    q_nominal: int
    q_effective: int
    p_nominal: float
    p_effective: float
    degenerate: bool
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            'statistic': self.statistic,
            'q_nominal': self.q_nominal,
            'q_effective': self.q_effective,
            'p_nominal': self.p_nominal,
            'p_effective': self.p_effective,
            'degenerate': self.degenerate,
            'notes': list(self.notes),
        }


def standard_error(fit: Fit) -> float:
    """
    Scalar standard error {Omega_00.x / sum x_t^2}^(1/2)

    Args:
        fit: Fit with m0 = mx = 1

    Returns:
        Standard error of A+
    """
    omega_cond, xtx = _scalar_parts(fit)
    if not omega_cond > 0:
        raise DegenerateVarianceError(
            f"conditional long run variance is {omega_cond:.3e}; the t-statistic is "
            "undefined (expected under exact multicointegration)", effective_rank=0)
    return math.sqrt(omega_cond / xtx)


def t_value(estimate: float, hypothesized: float, se: float) -> float:
    """
    (estimate - hypothesized) / se

    Args:
        estimate: Point estimate
        hypothesized: Null value
        se: Standard error (> 0)

    Returns:
        t-statistic
    """
    if not se > 0:
        raise DomainError(f"standard error must be positive, got {se}")
    return (estimate - hypothesized) / se


def t_statistic(fit: Fit, A0: float) -> float:
    """
    t = (A+ - A0) / {Omega_00.x / sum x_t^2}^(1/2) for a scalar system

    Args:
        fit: Fit with m0 = mx = 1
        A0: Hypothesized value

    Returns:
        Signed t-statistic
    """
    a_plus = float(np.asarray(fit.A_plus).reshape(-1)[0])
    return t_value(a_plus, float(A0), standard_error(fit))


def normal_pvalue(t: float) -> float:
    """Two-sided p-value against the standard normal"""
    return float(2.0 * stats.norm.sf(abs(t)))


def _scalar_parts(fit: Fit):
    A_plus = np.atleast_2d(fit.A_plus)
    if A_plus.shape != (1, 1):
        raise DomainError("t-statistics are defined only for m0 = mx = 1; use wald()")
    return float(np.asarray(fit.omega_cond).reshape(-1)[0]), float(np.asarray(fit.xtx).reshape(-1)[0])


def _finite_difference_jacobian(phi: Callable, a: np.ndarray) -> np.ndarray:
    base = np.atleast_1d(phi(a))
    jac = np.zeros((base.shape[0], a.shape[0]))
    for i in range(a.shape[0]):
        h = 1e-6 * max(1.0, abs(a[i]))
        step = np.zeros_like(a)
        step[i] = h
        jac[:, i] = (np.atleast_1d(phi(a + step)) - np.atleast_1d(phi(a - step))) / (2.0 * h)
    return jac


def _reference_scale(Phi_or_R1: np.ndarray, omega_ref: np.ndarray, xtx_inv: Optional[np.ndarray]) -> float:
    """Largest eigenvalue of the restriction's variance built on a reference Omega block"""
    if xtx_inv is None:
        matrix = Phi_or_R1 @ omega_ref @ Phi_or_R1.T
    else:
        matrix = Phi_or_R1 @ np.kron(omega_ref, xtx_inv) @ Phi_or_R1.T
    matrix = np.atleast_2d(matrix)
    if matrix.size == 0:
        return 0.0
    return float(linalg.eigvalsh(0.5 * (matrix + matrix.T))[-1])


def rank_condition_check(restriction: Restriction, omega_cond: np.ndarray, xtx: np.ndarray,
                         tol: float = DEFAULT_RANK_TOL, omega_00: Optional[np.ndarray] = None,
                         at: Optional[np.ndarray] = None) -> RankDiagnosis:
    """
    Effective rank of Phi (Omega_00.x kron (X'X)^-1) Phi'

    For tensor restrictions this is rank(R1 Omega_00.x R1') * q2. Eigenvalues
    count when they exceed tol times the same quadratic form built on
    Omega_00, so the decision does not depend on the units of y or x.

    Args:
        restriction: Linear, tensor or general restriction
        omega_cond: Conditional long run covariance
        xtx: X'X
        tol: Relative rank tolerance
        omega_00: Unconditional long run covariance of u_0 (reference scale);
            without it the matrix's own largest eigenvalue is the reference
        at: Point vec(A) for evaluating a general restriction's Jacobian

    Returns:
        RankDiagnosis
    """
    omega_cond = np.atleast_2d(np.asarray(omega_cond, dtype=float))
    xtx = np.atleast_2d(np.asarray(xtx, dtype=float))
    omega_ref = None if omega_00 is None else np.atleast_2d(np.asarray(omega_00, dtype=float))

    if isinstance(restriction, TensorRestriction):
        inner = restriction.R1 @ omega_cond @ restriction.R1.T
        scale = None if omega_ref is None else _reference_scale(restriction.R1, omega_ref, None)
        q1_eff = numerical_rank(inner, tol, 0.0, scale=scale)
        q2 = restriction.R2.shape[1]
        q_effective = q1_eff * q2
        q_nominal = restriction.q
    else:
        if isinstance(restriction, LinearRestriction):
            Phi = restriction.Q
        else:
            if at is None:
                raise DomainError("a general restriction needs the evaluation point 'at'")
            Phi = _jacobian(restriction, np.asarray(at, dtype=float))[0]
        xtx_inv = linalg.inv(xtx)
        middle = Phi @ np.kron(omega_cond, xtx_inv) @ Phi.T
        scale = None if omega_ref is None else _reference_scale(Phi, omega_ref, xtx_inv)
        q_nominal = Phi.shape[0]
        q_effective = numerical_rank(middle, tol, 0.0, scale=scale)

    return RankDiagnosis(q_nominal=q_nominal, q_effective=q_effective,
                         satisfied=q_effective == q_nominal)


def _jacobian(restriction: GeneralRestriction, a: np.ndarray):
    notes = []
    if restriction.jacobian is not None:
        Phi = np.atleast_2d(restriction.jacobian(a))
    else:
        Phi = _finite_difference_jacobian(restriction.phi, a)
        notes.append("Jacobian from central finite differences (h = 1e-6 * max(1, |a|))")
    return Phi, notes


def wald(fit: Fit, restriction: Restriction, allow_degenerate: bool = False,
         tol: float = DEFAULT_RANK_TOL) -> WaldResult:
    """
    W = phi' {Phi (Omega_00.x kron (X'X)^-1) Phi'}^-1 phi

    Args:
        fit: FM-OLS fit (or a restored summary)
        restriction: Hypothesis to test
        allow_degenerate: Pseudo-invert a singular middle matrix instead of raising
        tol: Relative eigenvalue tolerance for rank decisions, measured
            against the Omega_00 form when the fit carries it

    Returns:
        WaldResult
    """
    a = vec(fit.A_plus)
    omega_cond = np.atleast_2d(np.asarray(fit.omega_cond, dtype=float))
    xtx = np.atleast_2d(np.asarray(fit.xtx, dtype=float))
    notes: List[str] = []

    if isinstance(restriction, GeneralRestriction):
        phi = np.atleast_1d(np.asarray(restriction.phi(a), dtype=float))
        Phi, jac_notes = _jacobian(restriction, a)
        notes.extend(jac_notes)
    else:
        linear = restriction.as_linear() if isinstance(restriction, TensorRestriction) else restriction
        if linear.Q.shape[1] != a.shape[0]:
            raise DomainError(f"restriction has {linear.Q.shape[1]} columns, vec(A) has {a.shape[0]}")
        phi = linear.Q @ a - linear.r0
        Phi = linear.Q

    q_nominal = phi.shape[0]
    xtx_inv = linalg.inv(xtx)
    middle = Phi @ np.kron(omega_cond, xtx_inv) @ Phi.T
    middle = 0.5 * (middle + middle.T)

    omega_00 = getattr(fit, 'omega_00', None)
    if omega_00 is None and isinstance(fit, FmolsFit):
        omega_00 = fit.lr.omega_00
    if omega_00 is not None:
        omega_00 = np.atleast_2d(np.asarray(omega_00, dtype=float))
        scale = _reference_scale(Phi, omega_00, xtx_inv)
    else:
        scale = float(linalg.eigvalsh(middle)[-1])

    diagnosis = rank_condition_check(restriction, omega_cond, xtx, tol, omega_00=omega_00, at=a)
    degenerate = not diagnosis.satisfied
    middle_rank = numerical_rank(middle, tol, 0.0, scale=scale)

    if middle_rank < q_nominal:
        if not allow_degenerate:
            raise DegenerateVarianceError(
                "Wald middle matrix is singular; rerun with allow_degenerate to pseudo-invert",
                effective_rank=middle_rank)
        eigenvalues, vectors = linalg.eigh(middle)
        keep = eigenvalues > tol * max(scale, 0.0)
        keep &= eigenvalues > 0.0
        inverse = (vectors[:, keep] / eigenvalues[keep]) @ vectors[:, keep].T
        statistic = float(phi @ inverse @ phi)
        notes.append(f"middle matrix pseudo-inverted on {int(keep.sum())} of {q_nominal} directions")
        degenerate = True
    else:
        statistic = float(phi @ linalg.solve(middle, phi, assume_a='pos'))
    statistic = max(statistic, 0.0)

    q_effective = diagnosis.q_effective if degenerate else q_nominal
    p_nominal = float(stats.chi2.sf(statistic, q_nominal))
    if q_effective > 0:
        p_effective = float(stats.chi2.sf(statistic, q_effective))
    else:
        p_effective = 1.0
        notes.append("no nondegenerate directions: effective reference law is a point mass")
    if degenerate:
        notes.append(f"rank condition fails: effective rank {q_effective} < {q_nominal}; "
                     "the nominal test is conservative")
        logger.warning("Wald rank condition fails (q_effective=%d, q_nominal=%d)",
                       q_effective, q_nominal)

    return WaldResult(statistic=statistic, q_nominal=q_nominal, q_effective=q_effective,
                      p_nominal=p_nominal, p_effective=p_effective, degenerate=degenerate,
                      notes=notes)


def wald_trace_form(fit: Fit, A0: np.ndarray) -> float:
    """
    Full-restriction statistic tr{(X'X)(A+ - A0)' Omega_00.x^-1 (A+ - A0)}

    Args:
        fit: FM-OLS fit
        A0: Hypothesized matrix

    Returns:
        W_I
    """
    diff = np.atleast_2d(fit.A_plus) - np.atleast_2d(np.asarray(A0, dtype=float))
    omega_cond = np.atleast_2d(fit.omega_cond)
    return float(np.trace(np.atleast_2d(fit.xtx) @ diff.T @ linalg.solve(omega_cond, diff, assume_a='pos')))


def delta_rate(T: int, k: float) -> float:
    """
    Hyperconsistency rate in the null direction of Omega_00.x

    T^(1+2k) for k < 1/4, T^(3/2) for 1/4 <= k <= 1/2, T^(2-k) for k > 1/2.

    Args:
        T: Sample size (>= 1)
        k: Bandwidth exponent in (0, 1)

    Returns:
        delta(T)
    """
    return float(T) ** delta_exponent(k) if T >= 1 else _bad_T(T)


def delta_exponent(k: float) -> float:
    """
    Exponent of delta(T)

    Args:
        k: Bandwidth exponent in (0, 1)

    Returns:
        1 + 2k, 3/2 or 2 - k
    """
    if not 0.0 < k < 1.0:
        raise DomainError(f"bandwidth exponent must lie in (0, 1), got {k}")
    if k < 0.25:
        return 1.0 + 2.0 * k
    if k <= 0.5:
        return 1.5
    return 2.0 - k


def _bad_T(T: int) -> float:
    raise DomainError(f"sample size must be at least 1, got {T}")


def wald_rate_exponent(k: float) -> float:
    """
    Order of W_I under a null Omega_00.x with nonsingular Omega_ee

    -2k for k <= 1/4 and 2k - 1 for 1/4 < k < 1/3.

    Args:
        k: Bandwidth exponent in (0, 1/3)

    Returns:
        Exponent e with W_I = O_p(T^e)
    """
    if not 0.0 < k < 1.0 / 3.0:
        raise DomainError(f"the W_I rate is stated for k in (0, 1/3), got {k}")
    return -2.0 * k if k <= 0.25 else 2.0 * k - 1.0


_MATRIX_PATTERN = re.compile(r'^\s*(?P<name>A0|Q|r0)\s*=\s*(?P<body>.+?)\s*$')


def _parse_matrix(body: str) -> np.ndarray:
    rows = [row for row in body.split(';') if row.strip()]
    return np.array([[float(cell) for cell in row.split(',')] for row in rows])


def parse_restriction(text: str, m0: int, mx: int) -> Restriction:
    """
    Parse "A0=a11,a12;a21,a22" or "Q=...;...|r0=..." from the command line

    Args:
        text: Restriction description (rows separated by ';', cells by ',')
        m0: Rows of A
        mx: Columns of A

    Returns:
        Restriction object
    """
    parts = {}
    for chunk in text.split('|'):
        match = _MATRIX_PATTERN.match(chunk)
        if match is None:
            raise DomainError(f"cannot parse restriction fragment '{chunk}'")
        try:
            parts[match.group('name')] = _parse_matrix(match.group('body'))
        except ValueError:
            raise DomainError(f"non-numeric entry in restriction fragment '{chunk}'")

    if 'A0' in parts:
        A0 = parts['A0'].reshape(m0, mx) if parts['A0'].size == m0 * mx else None
        if A0 is None:
            raise DomainError(f"A0 must have {m0 * mx} entries")
        return full_restriction(A0)
    if 'Q' in parts and 'r0' in parts:
        return LinearRestriction(parts['Q'], parts['r0'].reshape(-1))
    raise DomainError("restriction needs either A0=... or Q=...|r0=...")
