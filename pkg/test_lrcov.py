#!/usr/bin/env python3
"""
Test script for long run covariance estimation and the conditional
(Schur complement) blocks
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from core.dgp import dgp1, make_generator, population, simulate_errors
from core.errors import AsymmetryError, DomainError
from core.kernels import kernel_weights, parse_kernel
from core.lrcov import (estimate_longrun, longrun_cov, numerical_rank, onesided_longrun_cov,
                        schur_complement, singular_directions)
from core.series import lag_autocovariance

PARZEN = parse_kernel('parzen')


def _noise(T=60, m=3, seed=1):
    return np.random.default_rng(seed).standard_normal((T, m))


def test_two_sided_is_one_sided_identity():
    """Omega = Delta + Delta' - Gamma(0) exactly, and symmetric"""
    u = _noise()
    for name in ('parzen', 'th', 'bartlett', 'qs'):
        kernel = parse_kernel(name)
        omega = longrun_cov(u, kernel, 4.3)
        delta = onesided_longrun_cov(u, kernel, 4.3)
        np.testing.assert_array_equal(omega, delta + delta.T - lag_autocovariance(u, 0))
        np.testing.assert_array_equal(omega, omega.T)


def test_matches_direct_sum():
    """Same value as summing w(j/K) Gamma(j) over every |j| < T"""
    u = _noise(T=50)
    for name in ('parzen', 'qs'):
        kernel = parse_kernel(name)
        K = 6.5
        lags = np.arange(-(u.shape[0] - 1), u.shape[0])
        weights = kernel_weights(kernel, lags / K)
        direct = sum(w * lag_autocovariance(u, int(j)) for j, w in zip(lags, weights))
        np.testing.assert_allclose(longrun_cov(u, kernel, K), direct, atol=1e-12)


def test_tiny_bandwidth_keeps_lag_zero():
    """With K <= 1 a compact kernel gives zero weight to every nonzero lag"""
    u = _noise()
    np.testing.assert_array_equal(longrun_cov(u, PARZEN, 0.5), lag_autocovariance(u, 0))
    np.testing.assert_array_equal(longrun_cov(u, parse_kernel('bartlett'), 1.0),
                                  lag_autocovariance(u, 0))
    with pytest.raises(DomainError):
        longrun_cov(u, PARZEN, 0.0)


def test_schur_complement():
    cond, F = schur_complement(np.array([[2.0, 1.0], [1.0, 1.0]]), 1)
    assert cond[0, 0] == pytest.approx(1.0)
    assert F[0, 0] == pytest.approx(1.0)


def test_estimate_blocks():
    """Blocks partition Omega and omega_cond is their Schur complement"""
    u = _noise(T=200, m=3)
    est = estimate_longrun(u, PARZEN, 200 ** 0.25, m0=2)
    np.testing.assert_array_equal(est.omega_00, est.omega[:2, :2])
    np.testing.assert_array_equal(est.omega_0x, est.omega[:2, 2:])
    np.testing.assert_array_equal(est.delta_xx, est.delta[2:, 2:])
    expected = est.omega_00 - est.omega_0x @ np.linalg.solve(est.omega_xx, est.omega_0x.T)
    np.testing.assert_allclose(est.omega_cond, expected, atol=1e-12)
    np.testing.assert_allclose(est.F, est.omega_0x @ np.linalg.inv(est.omega_xx), atol=1e-12)

    payload = est.to_dict()
    assert payload['m0'] == 2
    assert payload['rank_diagnostic'] == 2


def test_singular_directions():
    directions = singular_directions(np.diag([3.0, 0.0]))
    assert directions.r == 1
    np.testing.assert_allclose(directions.R @ directions.R.T, np.diag([3.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(np.abs(directions.R_perp), [[0.0], [1.0]], atol=1e-12)
    assert directions.eigenvalues[0] >= directions.eigenvalues[1]

    assert singular_directions(np.zeros((2, 2))).r == 0
    assert singular_directions(np.eye(2)).R_perp.shape == (2, 0)

    with pytest.raises(AsymmetryError):
        singular_directions(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_parzen_estimate_is_positive_semidefinite():
    """Parzen weights never give an indefinite Omega, and Omega_00.x stays positive"""
    for seed in range(100):
        rng = np.random.default_rng(seed)
        T = int(rng.integers(20, 120))
        e = rng.standard_normal((T + 1, 3))
        u = e[1:] + rng.uniform(-1.0, 1.0) * e[:-1]
        K = rng.uniform(0.5, 15.0)
        est = estimate_longrun(u, PARZEN, K, m0=1)
        eigenvalues = np.linalg.eigvalsh(est.omega)
        assert eigenvalues[0] >= -1e-12 * eigenvalues[-1]
        assert est.omega_cond[0, 0] > 0.0


def test_white_noise_estimates():
    """DGP1 p = 0 at T = 20000: Omega near I and Delta near Gamma+ = I"""
    spec = dgp1(0.0)
    pop = population(spec)
    T = 20000
    K = T ** 0.25
    runs = [estimate_longrun(simulate_errors(spec, T, make_generator(23, r)), PARZEN, K, m0=1)
            for r in range(8)]
    omega = np.mean([est.omega for est in runs], axis=0)
    delta = np.mean([est.delta for est in runs], axis=0)
    np.testing.assert_allclose(pop.omega, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(omega, pop.omega, atol=0.05)
    np.testing.assert_allclose(delta, pop.gamma_plus, atol=0.05)


def test_singular_directions_of_low_rank_product():
    """Omega = G G' with G of full column rank 2 gives r = 2 and the span of G"""
    G = np.random.default_rng(4).standard_normal((4, 2))
    omega = G @ G.T
    directions = singular_directions(omega)
    assert directions.r == 2
    assert directions.R.shape == (4, 2) and directions.R_perp.shape == (4, 2)
    np.testing.assert_allclose(directions.R @ directions.R.T, omega, atol=1e-10)
    np.testing.assert_allclose(directions.R_perp.T @ G, np.zeros((2, 2)), atol=1e-10)
    np.testing.assert_allclose(directions.R_perp.T @ directions.R_perp, np.eye(2), atol=1e-12)
    projector = G @ np.linalg.solve(G.T @ G, G.T)
    np.testing.assert_allclose(projector @ directions.R, directions.R, atol=1e-10)


def test_numerical_rank():
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert numerical_rank(np.diag([1.0, 1e-10, 0.0])) == 1
    assert numerical_rank(np.diag([1.0, 1e-6, 0.0])) == 2
    assert numerical_rank(np.diag([1.0, 1e-6]), scale=1e3) == 1


def test_kernel_estimate_converges():
    """Average Frobenius error to the population Omega falls with T"""
    spec = dgp1(0.5)
    omega = population(spec).omega
    errors = []
    for T in (2000, 8000, 32000):
        runs = []
        for r in range(20):
            u = simulate_errors(spec, T, make_generator(17, r))
            runs.append(np.linalg.norm(longrun_cov(u, PARZEN, T ** 0.25) - omega))
        errors.append(np.mean(runs))
    assert errors[0] > errors[1] > errors[2]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
