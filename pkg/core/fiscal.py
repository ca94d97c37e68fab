#!/usr/bin/env python3
"""
Fiscal Sustainability Pipeline for MultiCoint
Loads FRED-style quarterly series, builds the receipts-on-expenditures system
and reports the FM-OLS test of H0: A = 1

Version: 1.0.0
"""

import logging
import math
import re
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from dateutil import parser as date_parser
from dateutil.relativedelta import relativedelta

from .errors import DataFormatError, DomainError
from .fmols import FmolsFit, fm_ols
from .inference import normal_pvalue, standard_error, t_value
from .kernels import BandwidthRule, KernelSpec, bandwidth
from .localization import translate
from .lrcov import singular_directions
from .series import SystemData, TimeSeriesMatrix

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = "1.0"

MODES = ('levels', 'logs', 'real')

# Omega_00.x / Omega_00 below this is reported as near-singular
SINGULARITY_WARNING_RATIO = 0.1

_QUARTER_PATTERN = re.compile(r'^\s*(?P<year>\d{4})\s*[:-]?\s*[Qq](?P<quarter>[1-4])\s*$')
_QUARTER_MONTHS = (1, 4, 7, 10)


@dataclass(frozen=True)
class FiscalDataset:
    """
    Quarterly government expenditures and receipts aligned on common dates,
    with optional price deflator (index, 100 = base) and population
    """
    dates: pd.DatetimeIndex
    expenditures: np.ndarray
    receipts: np.ndarray
    deflator: Optional[np.ndarray] = None
    population: Optional[np.ndarray] = None
    sources: Tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.dates)
        for name in ('expenditures', 'receipts', 'deflator', 'population'):
            value = getattr(self, name)
            if value is None:
                continue
            array = np.asarray(value, dtype=float)
            if array.shape != (n,):
                raise DomainError(f"{name} has {array.shape[0]} values for {n} dates")
            if not np.all(np.isfinite(array)):
                raise DomainError(f"{name} contains missing or non-finite values")
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def T(self) -> int:
        return len(self.dates)

    def window(self, start: Optional[pd.Timestamp] = None,
               end: Optional[pd.Timestamp] = None) -> np.ndarray:
        """Boolean mask of dates inside [start, end]"""
        mask = np.ones(self.T, dtype=bool)
        if start is not None:
            mask &= self.dates >= start
        if end is not None:
            mask &= self.dates <= end
        return mask


def parse_quarter(text: str) -> pd.Timestamp:
    """
    Parse 1947Q1, 1947:Q1, 1947-Q1 or an ISO date into the quarter's first day

    Args:
        text: Quarter or date

    Returns:
        Timestamp at the start of the quarter
    """
    match = _QUARTER_PATTERN.match(text)
    if match:
        month = _QUARTER_MONTHS[int(match.group('quarter')) - 1]
        return pd.Timestamp(year=int(match.group('year')), month=month, day=1)
    try:
        parsed = date_parser.isoparse(text.strip())
    except (ValueError, OverflowError):
        raise DomainError(f"cannot parse quarter '{text}' (expected e.g. 1947Q1)")
    month = 3 * ((parsed.month - 1) // 3) + 1
    return pd.Timestamp(year=parsed.year, month=month, day=1)


def format_quarter(date: Union[pd.Timestamp, datetime]) -> str:
    return f"{date.year}Q{(date.month - 1) // 3 + 1}"


def _check_quarterly(dates: List[datetime], path: Optional[str] = None,
                     first_line: Optional[int] = None) -> None:
    for i, date in enumerate(dates):
        line = None if first_line is None else first_line + i
        if date.day != 1 or date.month not in _QUARTER_MONTHS:
            raise DataFormatError(f"{date.date()} is not the first day of a quarter",
                                  path=path, line=line)
        if i and date != dates[i - 1] + relativedelta(months=3):
            raise DataFormatError(
                f"non-quarterly gap between {dates[i - 1].date()} and {date.date()}",
                path=path, line=line)


def read_fred_series(path: Union[str, Path]) -> pd.Series:
    """
    Read one two-column FRED CSV (DATE, VALUE)

    FRED marks unavailable observations with '.'; those are dropped with a
    warning. Dates must be unique, increasing and one quarter apart.

    Args:
        path: CSV file

    Returns:
        Float series indexed by date, named after the value column
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFormatError(f"cannot read series: {e}", path=str(path))
    if frame.shape[1] != 2:
        raise DataFormatError(f"expected 2 columns (DATE, VALUE), found {frame.shape[1]}",
                              path=str(path), line=1)

    name = str(frame.columns[1]).strip().lower()
    dates, values, missing = [], [], []
    seen = {}
    for offset, (raw_date, raw_value) in enumerate(frame.itertuples(index=False, name=None)):
        line = offset + 2
        try:
            date = date_parser.isoparse(str(raw_date).strip())
        except (ValueError, OverflowError):
            raise DataFormatError(f"unparseable date '{raw_date}'", path=str(path), line=line)
        if date in seen:
            raise DataFormatError(f"duplicate date {date.date()} (first on line {seen[date]})",
                                  path=str(path), line=line)
        seen[date] = line

        text = str(raw_value).strip()
        if text in ('.', ''):
            missing.append(date)
            value = math.nan
        else:
            try:
                value = float(text)
            except ValueError:
                raise DataFormatError(f"unparseable value '{raw_value}'", path=str(path), line=line)
        dates.append(date)
        values.append(value)

    if not dates:
        raise DataFormatError("no observations", path=str(path))
    _check_quarterly(dates, str(path), first_line=2)

    series = pd.Series(values, index=pd.DatetimeIndex(dates), name=name, dtype=float)
    if missing:
        logger.warning("%s: dropping %d missing observations: %s", path, len(missing),
                       ", ".join(format_quarter(d) for d in missing))
        series = series.dropna()
    return series


def load_fred_csv(expenditures: Union[str, Path], receipts: Union[str, Path],
                  deflator: Optional[Union[str, Path]] = None,
                  population: Optional[Union[str, Path]] = None) -> FiscalDataset:
    """
    Load and inner-join the fiscal series on their common dates

    Args:
        expenditures: GEXPND-style CSV
        receipts: GRECPT-style CSV
        deflator: Optional price deflator CSV (needed for real mode)
        population: Optional population CSV (needed for real mode)

    Returns:
        FiscalDataset
    """
    paths = {'expenditures': expenditures, 'receipts': receipts,
             'deflator': deflator, 'population': population}
    columns = {key: read_fred_series(path).rename(key)
               for key, path in paths.items() if path is not None}

    union = pd.DatetimeIndex(sorted(set().union(*(s.index for s in columns.values()))))
    joined = pd.concat(columns.values(), axis=1, join='inner').sort_index()
    dropped = union.difference(joined.index)
    if len(dropped):
        logger.warning("dropping %d dates not present in every series: %s", len(dropped),
                       ", ".join(format_quarter(d) for d in dropped))
    if joined.empty:
        raise DataFormatError("the series have no dates in common")
    _check_quarterly(list(joined.index.to_pydatetime()))

    logger.info("loaded %d quarters %s-%s", len(joined), format_quarter(joined.index[0]),
                format_quarter(joined.index[-1]))
    return FiscalDataset(
        dates=joined.index,
        expenditures=joined['expenditures'].to_numpy(),
        receipts=joined['receipts'].to_numpy(),
        deflator=joined['deflator'].to_numpy() if 'deflator' in joined else None,
        population=joined['population'].to_numpy() if 'population' in joined else None,
        sources=tuple(str(p) for p in paths.values() if p is not None))


def _transformed_columns(ds: FiscalDataset, mode: str) -> Tuple[np.ndarray, np.ndarray]:
    """(expenditures, receipts) after the mode's transformation, full sample"""
    if mode not in MODES:
        raise DomainError(f"unknown mode '{mode}' (expected one of {', '.join(MODES)})")
    x, y = ds.expenditures, ds.receipts
    if mode == 'real':
        if ds.deflator is None or ds.population is None:
            raise DomainError("real mode needs both a deflator and a population series")
        scale = (ds.deflator / 100.0) * ds.population
        if np.any(scale <= 0):
            bad = ds.dates[np.argmax(scale <= 0)]
            raise DomainError(f"nonpositive deflator or population at {format_quarter(bad)}")
        return x / scale, y / scale
    if mode == 'logs':
        for name, values in (('expenditures', x), ('receipts', y)):
            if np.any(values <= 0):
                bad = ds.dates[np.argmax(values <= 0)]
                raise DomainError(f"{name} is not positive at {format_quarter(bad)}; "
                                  "logs are undefined")
        return np.log(x), np.log(y)
    return x, y


def transform(ds: FiscalDataset, mode: str = 'levels',
              window: Optional[Tuple[Optional[pd.Timestamp], Optional[pd.Timestamp]]] = None
              ) -> SystemData:
    """
    Build y_t = receipts, x_t = expenditures under a transformation and window

    The initial value x0 is the observation just before the window when the
    dataset has one; otherwise x0 = x_1, so the first increment is zero.

    Args:
        ds: Dataset
        mode: levels, logs or real (deflated, per capita)
        window: Inclusive (start, end) quarter bounds, either may be None

    Returns:
        SystemData with labelled columns
    """
    x, y = _transformed_columns(ds, mode)
    start, end = window if window is not None else (None, None)
    mask = ds.window(start, end)
    if mask.sum() < 2:
        raise DomainError("the window contains fewer than 2 observations")

    first = int(np.argmax(mask))
    x0 = x[first - 1] if first > 0 else x[first]
    label = {'levels': '', 'logs': 'log_', 'real': 'real_pc_'}[mode]
    return SystemData(y=TimeSeriesMatrix(y[mask], (f"{label}grecpt",)),
                      x=TimeSeriesMatrix(x[mask], (f"{label}gexpnd",)),
                      x0=np.array([x0]))


def fiscal_series_table(ds: FiscalDataset, mode: str = 'levels') -> pd.DataFrame:
    """
    Levels, logs, first differences and first differences of logs per date

    Args:
        ds: Dataset
        mode: levels or real (the base series before logs and differences)

    Returns:
        Frame indexed by quarter
    """
    if mode == 'logs':
        raise DomainError("the series table already contains logs; use levels or real")
    x, y = _transformed_columns(ds, mode)
    frame = pd.DataFrame({'expenditures': x, 'receipts': y},
                         index=pd.Index([format_quarter(d) for d in ds.dates], name='quarter'))
    if np.all(frame.to_numpy() > 0):
        frame['log_expenditures'] = np.log(frame['expenditures'])
        frame['log_receipts'] = np.log(frame['receipts'])
    frame['diff_expenditures'] = frame['expenditures'].diff()
    frame['diff_receipts'] = frame['receipts'].diff()
    if 'log_expenditures' in frame:
        frame['dlog_expenditures'] = frame['log_expenditures'].diff()
        frame['dlog_receipts'] = frame['log_receipts'].diff()
    return frame


@dataclass
class SustainabilityReport:
    """
    FM-OLS test of strong sustainability (H0: A = A0, A0 = 1 by default)
    """
    a_plus: float
    a_ols: float
    standard_error: float
    t: float
    p_value: float
    A0: float
    T: int
    K: float
    kernel: str
    bandwidth: str
    intercept: bool
    omega_00: float
    omega_cond: float
    omega_cond_eigenvalues: List[float]
    singularity_ratio: float
    near_singular: bool
    caveat: str
    mode: Optional[str] = None
    window: Optional[Tuple[str, str]] = None
    notes: List[str] = field(default_factory=list)

    @property
    def rejects(self) -> bool:
        """Two-sided rejection at the 5% level against the normal"""
        return abs(self.t) > 1.959963984540054

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': REPORT_SCHEMA_VERSION,
            'mode': self.mode,
            'window': list(self.window) if self.window else None,
            'T': self.T,
            'kernel': self.kernel,
            'bandwidth': self.bandwidth,
            'K': self.K,
            'intercept': self.intercept,
            'A0': self.A0,
            'a_plus': self.a_plus,
            'a_ols': self.a_ols,
            'standard_error': self.standard_error,
            't': self.t,
            'p_value': self.p_value,
            'reject_5pct': self.rejects,
            'omega_00': self.omega_00,
            'omega_cond': self.omega_cond,
            'omega_cond_eigenvalues': list(self.omega_cond_eigenvalues),
            'singularity_ratio': self.singularity_ratio,
            'near_singular': self.near_singular,
            'caveat': self.caveat,
            'notes': list(self.notes),
        }


def sustainability_report(data: SystemData, kernel: KernelSpec, rule: BandwidthRule,
                          intercept: bool = False, A0: float = 1.0, mode: Optional[str] = None,
                          window: Optional[Tuple[str, str]] = None) -> SustainabilityReport:
    """
    Estimate receipts on expenditures by FM-OLS and test A = A0

    Args:
        data: Scalar system (y = receipts, x = expenditures)
        kernel: Kernel for the long run estimates
        rule: Bandwidth rule evaluated at the sample size
        intercept: Demean before estimation
        A0: Hypothesized coefficient
        mode: Transformation label carried into the report
        window: Quarter labels carried into the report

    Returns:
        SustainabilityReport
    """
    K = bandwidth(rule, data.T)
    fit: FmolsFit = fm_ols(data, kernel, K, intercept=intercept)
    se = standard_error(fit)
    a_plus = float(fit.A_plus[0, 0])
    t = t_value(a_plus, A0, se)

    omega_00 = float(fit.lr.omega_00[0, 0])
    omega_cond = float(fit.omega_cond[0, 0])
    ratio = omega_cond / omega_00 if omega_00 > 0 else 0.0
    near_singular = ratio < SINGULARITY_WARNING_RATIO
    notes = []
    if near_singular:
        logger.warning("conditional long run variance is %.3g of the unconditional one", ratio)
        notes.append(translate('report.near_singular', ratio=f"{ratio:.3g}"))

    return SustainabilityReport(
        a_plus=a_plus, a_ols=float(fit.A_ols[0, 0]), standard_error=se, t=t,
        p_value=normal_pvalue(t), A0=float(A0), T=data.T, K=K, kernel=kernel.name,
        bandwidth=rule.describe(), intercept=intercept, omega_00=omega_00, omega_cond=omega_cond,
        omega_cond_eigenvalues=singular_directions(fit.omega_cond).eigenvalues.tolist(),
        singularity_ratio=ratio, near_singular=near_singular,
        caveat=translate('report.caveat'), mode=mode, window=window, notes=notes)
