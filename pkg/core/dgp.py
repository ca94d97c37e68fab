#!/usr/bin/env python3
"""
Data Generating Processes for MultiCoint
Triangular systems driven by vector MA(q) errors, and exact population
quantities for the same systems

Version: 1.0.0
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from .errors import DomainError, MultiCointError
from .kernels import KernelSpec, curvature_at_zero, kernel_weights
from .lrcov import DEFAULT_ABS_FLOOR, DEFAULT_RANK_TOL, numerical_rank, singular_directions
from .series import SystemData

logger = logging.getLogger(__name__)

# Counter-based generator used for every simulated draw; changing it changes results
PRNG_NAME = "philox4x64-10"
PRNG_VERSION = 1

_UINT64 = 2 ** 64


@dataclass(frozen=True)
class DgpSpec:
    """
    y_t = A x_t + u_0t, x_t = x_{t-1} + u_xt, u_t = sum_j D_j eta_{t-j},
    eta_t iid N(0, sigma), D_0 = I
    """
    A: np.ndarray
    ma_coeffs: Tuple[np.ndarray, ...]
    sigma: np.ndarray
    x0: Optional[np.ndarray] = None
    name: str = "custom"

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=float))
        m = A.shape[0] + A.shape[1]
        sigma = np.atleast_2d(np.array(self.sigma, dtype=float))
        if sigma.shape != (m, m):
            raise DomainError(f"sigma must be {m} x {m}, got {sigma.shape}")
        if np.max(np.abs(sigma - sigma.T)) > 1e-12 * max(1.0, np.max(np.abs(sigma))):
            raise DomainError("sigma must be symmetric")
        if linalg.eigvalsh(sigma)[0] <= 0:
            raise DomainError("sigma must be positive definite")

        coeffs = []
        for j, D in enumerate(self.ma_coeffs, start=1):
            D = np.atleast_2d(np.array(D, dtype=float))
            if D.shape != (m, m):
                raise DomainError(f"D_{j} must be {m} x {m}, got {D.shape}")
            D.setflags(write=False)
            coeffs.append(D)

        x0 = np.zeros(A.shape[1]) if self.x0 is None else np.array(self.x0, dtype=float).reshape(-1)
        if x0.shape[0] != A.shape[1]:
            raise DomainError(f"x0 must have length {A.shape[1]}")

        for array in (A, sigma, x0):
            array.setflags(write=False)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'sigma', sigma)
        object.__setattr__(self, 'ma_coeffs', tuple(coeffs))
        object.__setattr__(self, 'x0', x0)

    @property
    def m0(self) -> int:
        return self.A.shape[0]

    @property
    def mx(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.m0 + self.mx

    @property
    def q(self) -> int:
        return len(self.ma_coeffs)

    def lag_polynomial(self) -> List[np.ndarray]:
        """D_0 = I followed by D_1..D_q"""
        return [np.eye(self.m)] + list(self.ma_coeffs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'A': self.A.tolist(),
            'ma_coeffs': [D.tolist() for D in self.ma_coeffs],
            'sigma': self.sigma.tolist(),
            'x0': self.x0.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'DgpSpec':
        try:
            return cls(A=payload['A'], ma_coeffs=tuple(payload.get('ma_coeffs', [])),
                       sigma=payload['sigma'], x0=payload.get('x0'),
                       name=payload.get('name', 'custom'))
        except KeyError as e:
            raise DomainError(f"DGP description is missing field {e}")

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'DgpSpec':
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))


def dgp1(p: float) -> DgpSpec:
    """
    Bivariate MA(1) with independent components: D_1 = [[p, 0], [0, 0]], sigma = I

    Omega_00.x = (1 + p)^2, so p = -1 gives an exactly singular system.
    """
    return DgpSpec(A=[[2.0]], ma_coeffs=(np.array([[p, 0.0], [0.0, 0.0]]),),
                   sigma=np.eye(2), name=f"dgp1(p={p:g})")


def dgp2(p: float) -> DgpSpec:
    """
    Bivariate MA(1) with correlated innovations: D_1 = [[0.3, 0.4], [p, 0.6]],
    sigma = [[1, 0.5], [0.5, 1]]; singular at p = 5.2
    """
    return DgpSpec(A=[[2.0]], ma_coeffs=(np.array([[0.3, 0.4], [p, 0.6]]),),
                   sigma=np.array([[1.0, 0.5], [0.5, 1.0]]), name=f"dgp2(p={p:g})")


PRESETS = {'dgp1': dgp1, 'dgp2': dgp2}


def preset(name: str, p: float) -> DgpSpec:
    """
    Build a named preset design

    Args:
        name: dgp1 or dgp2
        p: Design parameter

    Returns:
        DgpSpec
    """
    key = name.strip().lower()
    if key not in PRESETS:
        raise DomainError(f"unknown DGP '{name}' (expected one of {', '.join(sorted(PRESETS))})")
    return PRESETS[key](float(p))


def make_generator(seed: int, replication: int = 0) -> np.random.Generator:
    """
    Counter-based stream keyed by (seed, replication)

    Args:
        seed: Experiment seed (any integer, reduced mod 2^64)
        replication: Replication index (>= 0)

    Returns:
        numpy Generator over Philox
    """
    if replication < 0:
        raise DomainError(f"replication index must be nonnegative, got {replication}")
    key = np.array([int(seed) % _UINT64, int(replication) % _UINT64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate_errors(spec: DgpSpec, T: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw u_1..u_T, starting from q pre-sample innovations so u_1 is stationary

    Args:
        spec: Design
        T: Sample size
        rng: Generator to draw from

    Returns:
        T x m array of errors
    """
    q = spec.q
    chol = linalg.cholesky(spec.sigma, lower=True)
    eta = rng.standard_normal((T + q, spec.m)) @ chol.T
    u = eta[q:].copy()
    for j, D in enumerate(spec.ma_coeffs, start=1):
        u += eta[q - j:q - j + T] @ D.T
    return u


def simulate(spec: DgpSpec, T: int, seed: int, replication: int = 0) -> SystemData:
    """
    Simulate one sample path of the triangular system

    Bit-reproducible given (spec, T, seed, replication).

    Args:
        spec: Design
        T: Sample size (>= 2)
        seed: Experiment seed
        replication: Replication index selecting the stream

    Returns:
        SystemData with x0 = spec.x0
    """
    if T < 2:
        raise DomainError(f"sample size must be at least 2, got {T}")
    u = simulate_errors(spec, T, make_generator(seed, replication))
    u0, ux = u[:, :spec.m0], u[:, spec.m0:]
    x = spec.x0 + np.cumsum(ux, axis=0)
    y = x @ spec.A.T + u0
    return SystemData(y=y, x=x, x0=spec.x0)


def population_autocovariance(spec: DgpSpec, h: int) -> np.ndarray:
    """
    Gamma(h) = E u_{t+h} u_t' = sum_k D_{k+h} sigma D_k'

    Args:
        spec: Design
        h: Lag (negative lags give the transpose)

    Returns:
        m x m matrix (zero for |h| > q)
    """
    if h < 0:
        return population_autocovariance(spec, -h).T
    D = spec.lag_polynomial()
    gamma = np.zeros((spec.m, spec.m))
    for k in range(len(D) - h):
        gamma += D[k + h] @ spec.sigma @ D[k].T
    return gamma


def kernel_smoothed_omega(spec: DgpSpec, kernel: KernelSpec, K: float) -> np.ndarray:
    """
    sum_{|h| <= q} w(h/K) Gamma(h), the population target of a kernel estimate at bandwidth K

    Args:
        spec: Design
        kernel: Kernel specification
        K: Bandwidth

    Returns:
        m x m matrix
    """
    if not K > 0:
        raise DomainError(f"bandwidth must be positive, got {K}")
    lags = np.arange(-spec.q, spec.q + 1)
    weights = kernel_weights(kernel, lags / K)
    return sum(w * population_autocovariance(spec, int(h)) for h, w in zip(lags, weights))


def multicoint_rank(omega: np.ndarray, m0: int, tol: float = DEFAULT_RANK_TOL,
                    abs_floor: float = DEFAULT_ABS_FLOOR) -> int:
    """
    Rank of the multicointegrating relation, m - rank(Omega)

    Both rank decisions use tol relative to the largest eigenvalue of Omega,
    and the result must agree with m0 - rank(Omega_00.x).

    Args:
        omega: m x m symmetric PSD matrix
        m0: Size of the regressand block
        tol: Relative eigenvalue tolerance
        abs_floor: Absolute floor for the reference eigenvalue

    Returns:
        Multicointegration rank
    """
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    m = omega.shape[0]
    omega_xx = omega[m0:, m0:]
    if omega_xx.size == 0 or linalg.eigvalsh(0.5 * (omega_xx + omega_xx.T))[0] <= 0:
        raise DomainError("Omega_xx must be positive definite")

    scale = float(linalg.eigvalsh(0.5 * (omega + omega.T))[-1])
    omega_cond = omega[:m0, :m0] - omega[:m0, m0:] @ linalg.solve(omega_xx, omega[m0:, :m0],
                                                                   assume_a='pos')
    full = m - numerical_rank(omega, tol, abs_floor, scale=scale)
    conditional = m0 - numerical_rank(omega_cond, tol, abs_floor, scale=scale)
    if full != conditional:
        raise MultiCointError(
            f"rank identity violated: m - rank(Omega) = {full} but "
            f"m0 - rank(Omega_00.x) = {conditional}; the tolerance {tol:g} is borderline")
    return full


@dataclass(frozen=True)
class PopulationQuantities:
    """
    Exact population counterparts of the kernel estimates

    Entries that need a positive definite Omega_xx are None when it is not,
    with the reason in `notes`.
    """
    omega: np.ndarray
    gamma_plus: np.ndarray
    omega_cond: Optional[np.ndarray]
    F: Optional[np.ndarray]
    mc_rank: Optional[int]
    R_perp: Optional[np.ndarray]
    e_coeffs: List[np.ndarray] = field(default_factory=list)
    omega_ee: Optional[np.ndarray] = None
    phi0: Optional[np.ndarray] = None
    phi_minus_inf: Optional[np.ndarray] = None
    omega_xx: Optional[np.ndarray] = None
    notes: List[str] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.omega_cond is not None

    def limit_constants(self, kernel: KernelSpec) -> Dict[str, np.ndarray]:
        """
        Non-random factors of the k < 1/4 singular-direction limit

        Args:
            kernel: Kernel with finite w''(0)

        Returns:
            {'w2_phi0': w''(0) Phi_0, 'w2_phi_minus_inf_omega_xx_inv': w''(0) Phi_-inf Omega_xx^-1}
        """
        if not self.complete:
            raise DomainError("population quantities are incomplete (Omega_xx not positive definite)")
        w2 = curvature_at_zero(kernel)
        return {
            'w2_phi0': w2 * self.phi0,
            'w2_phi_minus_inf_omega_xx_inv': w2 * linalg.solve(self.omega_xx, self.phi_minus_inf.T,
                                                                assume_a='pos').T,
        }

    def to_dict(self) -> Dict[str, Any]:
        def listed(value):
            return None if value is None else np.asarray(value).tolist()

        return {
            'omega': listed(self.omega),
            'gamma_plus': listed(self.gamma_plus),
            'omega_cond': listed(self.omega_cond),
            'F': listed(self.F),
            'mc_rank': self.mc_rank,
            'R_perp': listed(self.R_perp),
            'e_coeffs': [listed(c) for c in self.e_coeffs],
            'omega_ee': listed(self.omega_ee),
            'phi0': listed(self.phi0),
            'phi_minus_inf': listed(self.phi_minus_inf),
            'notes': list(self.notes),
        }


def _e_covariance_with_ux(e_coeffs: List[np.ndarray], spec: DgpSpec, j: int) -> np.ndarray:
    """E e_{t+j} u_xt' = sum_k e_{k+j} sigma D_{x,k}'"""
    D = spec.lag_polynomial()
    rows = e_coeffs[0].shape[0] if e_coeffs else 0
    total = np.zeros((rows, spec.mx))
    for k, Dk in enumerate(D):
        if 0 <= k + j < len(e_coeffs):
            total += e_coeffs[k + j] @ spec.sigma @ Dk[spec.m0:, :].T
    return total


def population(spec: DgpSpec, tol: float = DEFAULT_RANK_TOL,
               abs_floor: float = DEFAULT_ABS_FLOOR) -> PopulationQuantities:
    """
    Closed-form Omega, Gamma+, the conditional blocks and the singular-direction
    quantities e_t, Omega_ee, Phi_0 and Phi_-inf

    Args:
        spec: Design
        tol: Relative tolerance for rank decisions
        abs_floor: Absolute floor for rank decisions

    Returns:
        PopulationQuantities
    """
    D = spec.lag_polynomial()
    D1 = sum(D)
    omega = D1 @ spec.sigma @ D1.T
    omega = 0.5 * (omega + omega.T)
    gamma_plus = sum(population_autocovariance(spec, h) for h in range(spec.q + 1))

    m0 = spec.m0
    omega_xx = omega[m0:, m0:]
    if linalg.eigvalsh(omega_xx)[0] <= abs_floor * max(1.0, float(np.max(np.abs(omega)))):
        logger.warning("Omega_xx is not positive definite for %s; partial output", spec.name)
        return PopulationQuantities(omega=omega, gamma_plus=gamma_plus, omega_cond=None, F=None,
                                    mc_rank=None, R_perp=None,
                                    notes=["Omega_xx is not positive definite"])

    F = linalg.solve(omega_xx, omega[m0:, :m0], assume_a='pos').T
    omega_cond = omega[:m0, :m0] - F @ omega[m0:, :m0]
    omega_cond = 0.5 * (omega_cond + omega_cond.T)
    mc_rank = multicoint_rank(omega, m0, tol, abs_floor)

    # null directions judged against the scale of Omega, not of Omega_00.x
    scale = float(linalg.eigvalsh(omega)[-1])
    directions = singular_directions(omega_cond, tol, max(abs_floor, tol * scale))
    R_perp = directions.R_perp

    L = np.hstack([np.eye(m0), -F])
    e_coeffs = []
    for j in range(spec.q):
        tail = sum(D[s] for s in range(j + 1, spec.q + 1))
        e_coeffs.append(R_perp.T @ L @ tail)

    s = R_perp.shape[1]
    if e_coeffs:
        e_of_one = sum(e_coeffs)
        omega_ee = e_of_one @ spec.sigma @ e_of_one.T
        phi0 = sum((j + 0.5) * _e_covariance_with_ux(e_coeffs, spec, j) for j in range(spec.q))
        phi_minus_inf = sum((j + 0.5) * _e_covariance_with_ux(e_coeffs, spec, j)
                            for j in range(-spec.q, spec.q))
    else:
        omega_ee = np.zeros((s, s))
        phi0 = np.zeros((s, spec.mx))
        phi_minus_inf = np.zeros((s, spec.mx))

    return PopulationQuantities(omega=omega, gamma_plus=gamma_plus, omega_cond=omega_cond, F=F,
                                mc_rank=mc_rank, R_perp=R_perp, e_coeffs=e_coeffs,
                                omega_ee=omega_ee, phi0=np.asarray(phi0),
                                phi_minus_inf=np.asarray(phi_minus_inf), omega_xx=omega_xx)
