#!/usr/bin/env python3
"""
Kernel Functions for MultiCoint
Lag-window kernels and bandwidth rules for long run covariance estimation

Version: 1.0.0
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from .errors import DomainError


class KernelFamily(Enum):
    """
    Supported lag-window kernels
    """
    PARZEN = 'parzen'
    TUKEY_HANNING = 'th'
    BARTLETT = 'bartlett'
    QUADRATIC_SPECTRAL = 'qs'


_ALIASES = {
    'parzen': KernelFamily.PARZEN,
    'th': KernelFamily.TUKEY_HANNING,
    'tukey-hanning': KernelFamily.TUKEY_HANNING,
    'tukey_hanning': KernelFamily.TUKEY_HANNING,
    'bartlett': KernelFamily.BARTLETT,
    'newey-west': KernelFamily.BARTLETT,
    'qs': KernelFamily.QUADRATIC_SPECTRAL,
    'quadratic-spectral': KernelFamily.QUADRATIC_SPECTRAL,
}

# Second derivatives at the origin
_CURVATURE = {
    KernelFamily.PARZEN: -12.0,
    KernelFamily.TUKEY_HANNING: -math.pi ** 2 / 2.0,
    KernelFamily.QUADRATIC_SPECTRAL: -36.0 * math.pi ** 2 / 125.0,
}

# Below this |6 pi x / 5| the quadratic spectral kernel uses its Taylor series
_QS_SERIES_CUTOFF = 1e-2


@dataclass(frozen=True)
class KernelSpec:
    """
    Kernel family together with its smoothness flags
    """
    family: KernelFamily = KernelFamily.PARZEN

    @property
    def name(self) -> str:
        return self.family.value

    @property
    def satisfies_assumption_k(self) -> bool:
        """Twice differentiable, compactly supported on [-1, 1] with w''(0) != 0"""
        return self.family in (KernelFamily.PARZEN, KernelFamily.TUKEY_HANNING)

    @property
    def support(self) -> float:
        """Half-width of the support (infinite for QS)"""
        if self.family is KernelFamily.QUADRATIC_SPECTRAL:
            return math.inf
        return 1.0

    @property
    def curvature_at_zero(self) -> float:
        return curvature_at_zero(self)


def parse_kernel(name: str) -> KernelSpec:
    """
    Build a kernel specification from a CLI name

    Args:
        name: parzen, th, bartlett or qs (a few long aliases accepted)

    Returns:
        KernelSpec
    """
    key = name.strip().lower()
    if key not in _ALIASES:
        raise DomainError(f"unknown kernel '{name}' (expected parzen, th, bartlett or qs)")
    return KernelSpec(_ALIASES[key])


def kernel_weights(spec: KernelSpec, x: np.ndarray) -> np.ndarray:
    """
    Vectorized kernel evaluation

    Args:
        spec: Kernel specification
        x: Points at which to evaluate w

    Returns:
        Array of weights, same shape as x
    """
    a = np.abs(np.asarray(x, dtype=float))
    family = spec.family

    if family is KernelFamily.PARZEN:
        inner = 1.0 - 6.0 * a ** 2 + 6.0 * a ** 3
        outer = 2.0 * (1.0 - a) ** 3
        return np.where(a <= 0.5, inner, np.where(a <= 1.0, outer, 0.0))

    if family is KernelFamily.TUKEY_HANNING:
        return np.where(a <= 1.0, 0.5 * (1.0 + np.cos(np.pi * a)), 0.0)

    if family is KernelFamily.BARTLETT:
        return np.where(a <= 1.0, 1.0 - a, 0.0)

    z = 6.0 * np.pi * a / 5.0
    z2 = z * z
    series = 1.0 - z2 / 10.0 + z2 ** 2 / 280.0 - z2 ** 3 / 15120.0
    with np.errstate(divide='ignore', invalid='ignore'):
        closed = 3.0 * (np.sin(z) / z - np.cos(z)) / z2
    return np.where(z < _QS_SERIES_CUTOFF, series, closed)


def kernel_weight(spec: KernelSpec, x: float) -> float:
    """
    Kernel weight w(x)

    Args:
        spec: Kernel specification
        x: Evaluation point

    Returns:
        w(x)
    """
    return float(kernel_weights(spec, np.array([x]))[0])


def curvature_at_zero(spec: KernelSpec) -> float:
    """
    Second derivative of the kernel at the origin

    Args:
        spec: Kernel specification

    Returns:
        w''(0)
    """
    if spec.family not in _CURVATURE:
        raise DomainError(f"{spec.name} kernel has no finite second derivative at zero")
    return _CURVATURE[spec.family]


@dataclass(frozen=True)
class BandwidthRule:
    """
    Bandwidth K = c * T^k, or a constant K when `constant` is set
    """
    c: float = 1.0
    k: float = 0.25
    constant: Optional[float] = None

    def __post_init__(self):
        if self.constant is not None:
            if not self.constant > 0:
                raise DomainError(f"constant bandwidth must be positive, got {self.constant}")
            return
        if not self.c > 0:
            raise DomainError(f"bandwidth scale c must be positive, got {self.c}")
        if not 0.0 < self.k < 1.0:
            raise DomainError(f"bandwidth exponent k must lie in (0, 1), got {self.k}")

    @classmethod
    def fixed(cls, value: float) -> 'BandwidthRule':
        return cls(constant=float(value))

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def describe(self) -> str:
        if self.constant is not None:
            return f"K={self.constant:g}"
        return f"{self.c:g}*T^{self.k:g}"


_RULE_PATTERN = re.compile(
    r'^\s*(?:(?P<c>[0-9.eE+-]+)\s*\*\s*)?T\s*\^\s*(?P<k>[0-9.eE+-]+(?:\s*/\s*[0-9.]+)?)\s*$')


def parse_bandwidth(text: Union[str, float]) -> BandwidthRule:
    """
    Parse "c*T^k", "T^1/4" or a plain number (constant bandwidth)

    Args:
        text: Rule description

    Returns:
        BandwidthRule
    """
    if isinstance(text, (int, float)):
        return BandwidthRule.fixed(float(text))
    match = _RULE_PATTERN.match(text)
    if match is None:
        try:
            return BandwidthRule.fixed(float(text))
        except ValueError:
            raise DomainError(f"cannot parse bandwidth rule '{text}'")

    c = float(match.group('c')) if match.group('c') else 1.0
    exponent = match.group('k')
    if '/' in exponent:
        num, den = exponent.split('/')
        k = float(num) / float(den)
    else:
        k = float(exponent)
    return BandwidthRule(c=c, k=k)


def bandwidth(rule: BandwidthRule, T: int) -> float:
    """
    Evaluate the bandwidth for a sample size (never rounded)

    Args:
        rule: Bandwidth rule
        T: Sample size

    Returns:
        Real-valued K
    """
    if T < 2:
        raise DomainError(f"sample size must be at least 2, got {T}")
    if rule.constant is not None:
        return float(rule.constant)
    return rule.c * float(T) ** rule.k
