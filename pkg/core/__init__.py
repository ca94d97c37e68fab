#!/usr/bin/env python3
"""
Core Module for MultiCoint
FM-OLS estimation, long run covariance kernels, inference, simulation designs
and the fiscal application

Version: 1.0.0
"""

from .errors import (AsymmetryError, DataFormatError, DegenerateVarianceError, DomainError,
                     MultiCointError, SingularDesignError)
from .fmols import FitSummary, FmolsFit, fm_ols
from .kernels import BandwidthRule, KernelSpec, bandwidth, parse_bandwidth, parse_kernel
from .series import SystemData, TimeSeriesMatrix

__all__ = [
    'AsymmetryError', 'DataFormatError', 'DegenerateVarianceError', 'DomainError',
    'MultiCointError', 'SingularDesignError',
    'FitSummary', 'FmolsFit', 'fm_ols',
    'BandwidthRule', 'KernelSpec', 'bandwidth', 'parse_bandwidth', 'parse_kernel',
    'SystemData', 'TimeSeriesMatrix',
]
