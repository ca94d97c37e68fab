#!/usr/bin/env python3
"""
Monte Carlo Harness for MultiCoint
Replicated simulation of OLS and FM-OLS under a design, table aggregation,
density estimates and rate-of-convergence diagnostics

Version: 1.0.0
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from .dgp import DgpSpec, kernel_smoothed_omega, population, simulate
from .errors import DegenerateVarianceError, DomainError
from .fmols import fm_ols
from .inference import delta_exponent, t_statistic, wald_rate_exponent
from .kernels import BandwidthRule, KernelFamily, KernelSpec, bandwidth, curvature_at_zero
from .lrcov import schur_complement

logger = logging.getLogger(__name__)

DEFAULT_LEVELS = (0.10, 0.05, 0.01)
TABLE_COLUMNS = ['T', 'p', 'K', 'Bias-OLS', 'SD-OLS', 'Bias', 'SD', 't-Bias', 't-SD']

# columns of a replication outcome
_BIAS_OLS, _BIAS, _T = 0, 1, 2

# kernels with a finite second derivative at the origin
_CURVED_FAMILIES = (KernelFamily.PARZEN, KernelFamily.TUKEY_HANNING, KernelFamily.QUADRATIC_SPECTRAL)


@dataclass(frozen=True)
class McConfig:
    """
    One experiment: a design, sample sizes, bandwidths and replication count
    """
    dgp: DgpSpec
    T_list: Tuple[int, ...]
    reps: int
    kernel: KernelSpec
    bandwidths: Tuple[BandwidthRule, ...] = (BandwidthRule(),)
    A0: Optional[float] = None
    levels: Tuple[float, ...] = DEFAULT_LEVELS
    seed: int = 42
    workers: int = 1
    p: Optional[float] = None

    def __post_init__(self):
        if self.reps < 1:
            raise DomainError(f"reps must be at least 1, got {self.reps}")
        if not self.T_list:
            raise DomainError("T_list is empty")
        if any(T < 2 for T in self.T_list):
            raise DomainError(f"every T must be at least 2, got {list(self.T_list)}")
        if not self.bandwidths:
            raise DomainError("no bandwidth rule given")
        if any(not 0.0 < level < 1.0 for level in self.levels):
            raise DomainError(f"levels must lie in (0, 1), got {list(self.levels)}")
        if self.dgp.m0 != 1 or self.dgp.mx != 1:
            raise DomainError("Monte Carlo tables are defined for scalar systems (m0 = mx = 1)")
        object.__setattr__(self, 'T_list', tuple(int(T) for T in self.T_list))
        object.__setattr__(self, 'bandwidths', tuple(self.bandwidths))
        object.__setattr__(self, 'levels', tuple(float(level) for level in self.levels))

    @property
    def true_A(self) -> float:
        return float(self.dgp.A[0, 0])

    @property
    def null_value(self) -> float:
        return self.true_A if self.A0 is None else float(self.A0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dgp': self.dgp.to_dict(),
            'p': self.p,
            'T_list': list(self.T_list),
            'reps': self.reps,
            'kernel': self.kernel.name,
            'assumption_k': self.kernel.satisfies_assumption_k,
            'bandwidths': [rule.describe() for rule in self.bandwidths],
            'A0': self.null_value,
            'levels': list(self.levels),
            'seed': self.seed,
        }


@dataclass
class McCell:
    """
    Aggregates for one (T, bandwidth) cell; samples kept for density output
    """
    T: int
    p: Optional[float]
    K: float
    bandwidth: str
    bias_ols_mean: float
    bias_ols_sd: float
    bias_mean: float
    bias_sd: float
    t_mean: float
    t_sd: float
    rejections: Dict[float, float]
    n_reps: int
    n_degenerate: int
    bias_samples: np.ndarray = field(repr=False, default=None)
    t_samples: np.ndarray = field(repr=False, default=None)

    def row(self, levels: Sequence[float]) -> List[Any]:
        return [self.T, self.p, self.K, self.bias_ols_mean, self.bias_ols_sd, self.bias_mean,
                self.bias_sd, self.t_mean, self.t_sd] + \
               [self.rejections[level] for level in levels] + [self.n_degenerate]


@dataclass
class McReport:
    """
    Every cell of one experiment, in (T, bandwidth) order
    """
    config: McConfig
    cells: List[McCell]

    @property
    def columns(self) -> List[str]:
        return TABLE_COLUMNS + [f"{level:.2f}" for level in self.config.levels] + ['Degenerate']

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([cell.row(self.config.levels) for cell in self.cells],
                            columns=self.columns)

    def cell(self, T: int, index: int = 0) -> McCell:
        """Cell for sample size T and the index-th bandwidth rule"""
        matches = [c for c in self.cells if c.T == T]
        if not matches:
            raise KeyError(T)
        return matches[index]


def run_replication(spec: DgpSpec, T: int, kernel: KernelSpec, K_values: Sequence[float],
                    A0: float, seed: int, replication: int) -> np.ndarray:
    """
    simulate -> OLS/FM-OLS -> t for one replication at each bandwidth

    Args:
        spec: Scalar design
        T: Sample size
        kernel: Kernel
        K_values: Bandwidths to estimate with (same sample for all)
        A0: Null value for the t-statistic
        seed: Experiment seed
        replication: Stream index

    Returns:
        len(K_values) x 3 array (OLS bias, FM-OLS bias, t); t is NaN when degenerate
    """
    data = simulate(spec, T, seed, replication)
    true_A = float(spec.A[0, 0])
    outcome = np.empty((len(K_values), 3))
    for i, K in enumerate(K_values):
        fit = fm_ols(data, kernel, K)
        outcome[i, _BIAS_OLS] = fit.A_ols[0, 0] - true_A
        outcome[i, _BIAS] = fit.A_plus[0, 0] - true_A
        try:
            outcome[i, _T] = t_statistic(fit, A0)
        except DegenerateVarianceError:
            outcome[i, _T] = np.nan
    return outcome


def _run_block(task: Tuple) -> np.ndarray:
    """Replications [start, stop) of one sample size; module level so it pickles"""
    spec, T, kernel, K_values, A0, seed, start, stop = task
    block = np.empty((len(K_values), stop - start, 3))
    for offset, r in enumerate(range(start, stop)):
        block[:, offset, :] = run_replication(spec, T, kernel, K_values, A0, seed, r)
    return block


def _blocks(reps: int, workers: int) -> List[Tuple[int, int]]:
    size = max(1, math.ceil(reps / max(1, workers * 4)))
    return [(start, min(start + size, reps)) for start in range(0, reps, size)]


def simulate_outcomes(config: McConfig, T: int) -> np.ndarray:
    """
    All replications for one sample size, in replication order

    Args:
        config: Experiment configuration
        T: Sample size

    Returns:
        n_bandwidths x reps x 3 array
    """
    K_values = [bandwidth(rule, T) for rule in config.bandwidths]
    tasks = [(config.dgp, T, config.kernel, K_values, config.null_value, config.seed, start, stop)
             for start, stop in _blocks(config.reps, config.workers)]
    if config.workers <= 1 or len(tasks) == 1:
        blocks = [_run_block(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            # map keeps submission order, so the result does not depend on scheduling
            blocks = list(executor.map(_run_block, tasks))
    return np.concatenate(blocks, axis=1)


def rejection_rates(t_values: np.ndarray, levels: Sequence[float]) -> Dict[float, float]:
    """
    Two-sided standard normal rejection frequencies

    Args:
        t_values: Non-degenerate t-statistics
        levels: Nominal levels

    Returns:
        {level: rate}, NaN when there are no statistics
    """
    rates = {}
    for level in levels:
        critical = stats.norm.ppf(1.0 - level / 2.0)
        rates[level] = float(np.mean(np.abs(t_values) > critical)) if t_values.size else float('nan')
    return rates


def aggregate_cell(outcomes: np.ndarray, T: int, K: float, rule: BandwidthRule,
                   levels: Sequence[float], p: Optional[float] = None) -> McCell:
    """
    Moments and rejection rates from reps x 3 replication outcomes

    Degenerate replications (NaN t) stay in the bias moments but are left
    out of the t moments and rejection rates.
    """
    t_all = outcomes[:, _T]
    valid = ~np.isnan(t_all)
    t_values = t_all[valid]
    n_degenerate = int(np.sum(~valid))
    if n_degenerate:
        logger.warning("T=%d K=%.3f: %d degenerate replications excluded from t moments",
                       T, K, n_degenerate)
    return McCell(
        T=T, p=p, K=float(K), bandwidth=rule.describe(),
        bias_ols_mean=float(np.mean(outcomes[:, _BIAS_OLS])),
        bias_ols_sd=float(np.std(outcomes[:, _BIAS_OLS])),
        bias_mean=float(np.mean(outcomes[:, _BIAS])),
        bias_sd=float(np.std(outcomes[:, _BIAS])),
        t_mean=float(np.mean(t_values)) if t_values.size else float('nan'),
        t_sd=float(np.std(t_values)) if t_values.size else float('nan'),
        rejections=rejection_rates(t_values, levels),
        n_reps=outcomes.shape[0], n_degenerate=n_degenerate,
        bias_samples=outcomes[:, _BIAS].copy(), t_samples=t_values.copy())


def run_experiment(config: McConfig) -> McReport:
    """
    Run every (T, bandwidth) cell of an experiment

    Deterministic given the seed whatever the worker count: replication r
    always draws from stream (seed, r) and cells aggregate in replication order.

    Args:
        config: Experiment configuration

    Returns:
        McReport
    """
    if not config.kernel.satisfies_assumption_k:
        logger.warning("kernel %s is outside the smoothness class the singular-case theory covers",
                       config.kernel.name)
    cells = []
    for T in config.T_list:
        logger.info("simulating %s T=%d reps=%d", config.dgp.name, T, config.reps)
        outcomes = simulate_outcomes(config, T)
        for index, rule in enumerate(config.bandwidths):
            cells.append(aggregate_cell(outcomes[index], T, bandwidth(rule, T), rule,
                                        config.levels, config.p))
    return McReport(config=config, cells=cells)


def write_table_csv(reports: Sequence[McReport], path: Union[str, Path]) -> pd.DataFrame:
    """
    Write one or more reports as a single table

    Args:
        reports: Reports to stack (e.g. one per design parameter)
        path: Destination CSV

    Returns:
        The written frame
    """
    frame = pd.concat([report.to_frame() for report in reports], ignore_index=True)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format='%.6g')
    return frame


def silverman_bandwidth(samples: Sequence[float]) -> float:
    """
    Silverman's rule 1.06 * sd * n^(-1/5)

    Args:
        samples: At least two draws with positive spread

    Returns:
        Bandwidth
    """
    values = np.asarray(samples, dtype=float)
    if values.size < 2:
        raise DomainError("need at least 2 samples")
    sd = float(np.std(values, ddof=1))
    if not sd > 0:
        raise DomainError("samples have zero spread; pass a bandwidth explicitly")
    return 1.06 * sd * values.size ** (-0.2)


def density_grid(samples: Sequence[float], points: int = 512) -> np.ndarray:
    """
    Evaluation grid spanning mean +/- 4 sd

    Args:
        samples: Draws
        points: Grid size

    Returns:
        Grid array
    """
    values = np.asarray(samples, dtype=float)
    center, sd = float(np.mean(values)), float(np.std(values, ddof=1))
    return np.linspace(center - 4.0 * sd, center + 4.0 * sd, points)


def density_estimate(samples: Sequence[float], grid: Sequence[float], bw: float) -> np.ndarray:
    """
    Gaussian kernel density estimate with kernel standard deviation bw

    Args:
        samples: At least two draws
        grid: Evaluation points
        bw: Bandwidth (> 0)

    Returns:
        Density values on the grid
    """
    values = np.asarray(samples, dtype=float)
    points = np.asarray(grid, dtype=float)
    if values.size < 2:
        raise DomainError("need at least 2 samples")
    if not bw > 0:
        raise DomainError(f"bandwidth must be positive, got {bw}")
    sd = float(np.std(values, ddof=1))
    if sd > 0:
        # gaussian_kde scales its factor by the sample sd
        return stats.gaussian_kde(values, bw_method=bw / sd)(points)
    return stats.norm.pdf(points[:, None], loc=values[None, :], scale=bw).mean(axis=1)


def density_table(report: McReport, points: int = 512) -> pd.DataFrame:
    """
    Long-format density curves of the FM-OLS bias and the t-statistic per cell

    Args:
        report: Experiment report
        points: Grid size per curve

    Returns:
        Frame with columns T, p, K, quantity, grid, density
    """
    frames = []
    for cell in report.cells:
        for quantity, samples in (('bias', cell.bias_samples), ('t', cell.t_samples)):
            if samples is None or samples.size < 2 or not np.std(samples) > 0:
                logger.warning("T=%d: too few distinct %s draws for a density", cell.T, quantity)
                continue
            grid = density_grid(samples, points)
            values = density_estimate(samples, grid, silverman_bandwidth(samples))
            frames.append(pd.DataFrame({'T': cell.T, 'p': cell.p, 'K': cell.K,
                                        'quantity': quantity, 'grid': grid, 'density': values}))
    if not frames:
        return pd.DataFrame(columns=['T', 'p', 'K', 'quantity', 'grid', 'density'])
    return pd.concat(frames, ignore_index=True)


@dataclass(frozen=True)
class RateFit:
    """
    Least squares slope of log(sd) on log(T); the convergence rate is -slope
    """
    slope: float
    stderr: float
    intercept: float

    @property
    def rate(self) -> float:
        return -self.slope


def rate_exponent(points: Sequence[Tuple[float, float]]) -> RateFit:
    """
    Fit log(sd) = a + slope * log(T)

    Args:
        points: (T, sd) pairs, at least 3, sd > 0

    Returns:
        RateFit
    """
    if len(points) < 3:
        raise DomainError(f"need at least 3 points, got {len(points)}")
    T = np.array([point[0] for point in points], dtype=float)
    sd = np.array([point[1] for point in points], dtype=float)
    if np.any(sd <= 0) or np.any(T <= 0):
        raise DomainError("T and sd must be positive")
    fit = stats.linregress(np.log(T), np.log(sd))
    return RateFit(slope=float(fit.slope), stderr=float(fit.stderr), intercept=float(fit.intercept))


def rate_check(config: McConfig, wald: bool = False) -> Dict[str, Any]:
    """
    Empirical convergence rate of FM-OLS over the configured sample sizes

    Args:
        config: Experiment with at least three sample sizes and one bandwidth rule
        wald: Also report the median full-restriction Wald statistic per T

    Returns:
        JSON-friendly dictionary with the slope and the theoretical exponents
    """
    report = run_experiment(config)
    rule = config.bandwidths[0]
    cells = [report.cell(T) for T in config.T_list]
    fit = rate_exponent([(cell.T, cell.bias_sd) for cell in cells])
    pop = population(config.dgp)

    result: Dict[str, Any] = {
        'dgp': config.dgp.to_dict(),
        'kernel': config.kernel.name,
        'bandwidth': rule.describe(),
        'mc_rank': pop.mc_rank,
        'points': [{'T': cell.T, 'K': cell.K, 'bias_sd': cell.bias_sd} for cell in cells],
        'slope': fit.slope,
        'stderr': fit.stderr,
        'theory': {'nonsingular_slope': -1.0},
    }
    if not rule.is_constant:
        result['theory']['singular_slope'] = -delta_exponent(rule.k)
    if pop.complete and pop.mc_rank and config.kernel.family in _CURVED_FAMILIES:
        constants = pop.limit_constants(config.kernel)
        result['limit_constants'] = {name: value.tolist() for name, value in constants.items()}

    if wald:
        # W_I = t^2 for a scalar system under H0: A = true A
        medians = [{'T': cell.T, 'median_wald': float(np.median(cell.t_samples ** 2))
                    if cell.t_samples.size else float('nan')} for cell in cells]
        result['wald'] = {'medians': medians}
        if not rule.is_constant and 0.0 < rule.k < 1.0 / 3.0:
            result['wald']['theory_exponent'] = wald_rate_exponent(rule.k)
            valid = [m for m in medians if m['median_wald'] > 0]
            if len(valid) >= 3:
                result['wald']['slope'] = rate_exponent(
                    [(m['T'], m['median_wald']) for m in valid]).slope
    return result


@dataclass(frozen=True)
class ScalingPoint:
    """
    Average of T^(2k) * Omega_00.x-hat at one sample size
    """
    T: int
    K: float
    scaled_mean: float
    finite_K_target: float
    limit_target: Optional[float]


def omega_cond_scaling(spec: DgpSpec, T_list: Sequence[int], k: float, seeds: int,
                       kernel: KernelSpec, seed: int = 42, c: float = 1.0) -> List[ScalingPoint]:
    """
    Check the T^(2k) decay of the conditional long run variance estimate
    under exact singularity (K = c * T^k)

    The limit target is -w''(0) * Omega_ee / c^2; the finite-K target is the
    kernel-weighted population Schur complement scaled the same way.

    Args:
        spec: Scalar design
        T_list: Sample sizes
        k: Bandwidth exponent
        seeds: Number of replications averaged per T
        kernel: Kernel
        seed: Experiment seed
        c: Bandwidth scale

    Returns:
        One ScalingPoint per T
    """
    if spec.m0 != 1:
        raise DomainError("omega_cond_scaling is defined for m0 = 1")
    rule = BandwidthRule(c=c, k=k)
    pop = population(spec)
    limit = None
    if pop.complete and pop.omega_ee is not None and pop.omega_ee.size == 1 and \
            kernel.family in _CURVED_FAMILIES:
        limit = -curvature_at_zero(kernel) * float(pop.omega_ee[0, 0]) / c ** 2

    points = []
    for T in T_list:
        K = bandwidth(rule, T)
        scale = float(T) ** (2.0 * k)
        values = [fm_ols(simulate(spec, T, seed, r), kernel, K).omega_cond[0, 0]
                  for r in range(seeds)]
        smoothed_cond, _ = schur_complement(kernel_smoothed_omega(spec, kernel, K), spec.m0)
        points.append(ScalingPoint(T=int(T), K=K, scaled_mean=scale * float(np.mean(values)),
                                   finite_K_target=scale * float(smoothed_cond[0, 0]),
                                   limit_target=limit))
        logger.info("T=%d K=%.3f T^2k*Omega_00.x=%.4f", T, K, points[-1].scaled_mean)
    return points
