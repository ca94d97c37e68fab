#!/usr/bin/env python3
"""
Test script for the time series core: containers, autocovariances,
partial sums, OLS and matrix CSV files
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from core.errors import DataFormatError, DomainError, SingularDesignError
from core.series import (SystemData, TimeSeriesMatrix, first_difference, lag_autocovariance, ols,
                         partial_sum, read_matrix_csv, regression_residuals, solve_spd,
                         write_matrix_csv)


def test_container_validation():
    """Shapes, finiteness and labels are checked on construction"""
    series = TimeSeriesMatrix([1.0, 2.0, 3.0])
    assert (series.T, series.m) == (3, 1)

    with pytest.raises(DomainError):
        TimeSeriesMatrix([[1.0, np.nan], [2.0, 3.0]])
    with pytest.raises(DomainError):
        TimeSeriesMatrix([[1.0]])
    with pytest.raises(DomainError):
        TimeSeriesMatrix(np.zeros((4, 2)), labels=('only_one',))

    with pytest.raises(ValueError):
        series.data[0, 0] = 5.0


def test_system_data_increments():
    """The first increment is x_1 - x0"""
    data = SystemData(y=[[1.0], [2.0], [4.0]], x=[[3.0], [5.0], [6.0]], x0=[1.0])
    np.testing.assert_array_equal(data.delta_x, [[2.0], [2.0], [1.0]])

    default = SystemData(y=[[1.0], [2.0]], x=[[3.0], [5.0]])
    np.testing.assert_array_equal(default.delta_x, [[3.0], [2.0]])

    with pytest.raises(DomainError):
        SystemData(y=[[1.0], [2.0], [3.0]], x=[[1.0], [2.0]])


def test_lag_autocovariance_uses_T_divisor():
    """Gamma(j) divides by T at every lag and Gamma(-j) = Gamma(j)'"""
    u = np.array([[1.0], [2.0], [3.0]])
    assert lag_autocovariance(u, 0)[0, 0] == pytest.approx(14.0 / 3.0)
    assert lag_autocovariance(u, 1)[0, 0] == pytest.approx(8.0 / 3.0)
    assert lag_autocovariance(u, 2)[0, 0] == pytest.approx(3.0 / 3.0)

    rng = np.random.default_rng(3)
    v = rng.standard_normal((40, 3))
    np.testing.assert_array_equal(lag_autocovariance(v, -2), lag_autocovariance(v, 2).T)

    gamma0 = lag_autocovariance(v, 0)
    np.testing.assert_array_equal(gamma0, gamma0.T)

    with pytest.raises(DomainError):
        lag_autocovariance(u, 3)


def test_partial_sum_and_difference_invert():
    """Differencing partial sums recovers the input"""
    u = np.arange(12, dtype=float).reshape(6, 2)
    sums = partial_sum(u)
    np.testing.assert_array_equal(sums.data[-1], u.sum(axis=0))
    np.testing.assert_array_equal(first_difference(sums).data, u)


def test_ols_exact_fit():
    """A noiseless system returns its coefficient matrix"""
    rng = np.random.default_rng(11)
    x = np.cumsum(rng.standard_normal((200, 2)), axis=0)
    A = np.array([[2.0, -1.0], [0.5, 3.0]])
    y = x @ A.T
    np.testing.assert_allclose(ols(y, x), A, rtol=1e-10, atol=1e-10)


def test_ols_left_multiplication():
    """ols(C y, x) = C ols(y, x)"""
    rng = np.random.default_rng(12)
    x = np.cumsum(rng.standard_normal((150, 2)), axis=0)
    y = x @ np.array([[1.0, 2.0], [-0.5, 0.3]]).T + rng.standard_normal((150, 2))
    C = np.array([[3.0, -1.0], [0.2, 1.5]])
    np.testing.assert_allclose(ols(y @ C.T, x), C @ ols(y, x), rtol=1e-10, atol=1e-12)


def test_ols_partitioned_regression():
    """The coefficient on x1 equals the regression of y on x1 after x2 is partialled out"""
    rng = np.random.default_rng(13)
    x = np.cumsum(rng.standard_normal((180, 3)), axis=0)
    y = x @ np.array([[0.7, -1.2, 2.0]]).T + rng.standard_normal((180, 1))
    full = ols(y, x)

    x1, x2 = x[:, :1], x[:, 1:]
    y_tilde = regression_residuals(y, x2, ols(y, x2))
    x1_tilde = regression_residuals(x1, x2, ols(x1, x2))
    np.testing.assert_allclose(ols(y_tilde, x1_tilde), full[:, :1], rtol=1e-9, atol=1e-12)


def test_singular_design_raises():
    """No regularization: a collinear design is an error"""
    with pytest.raises(SingularDesignError) as info:
        solve_spd(np.array([[1.0, 1.0], [1.0, 1.0]]), np.ones(2))
    assert info.value.rcond <= 1e-12

    x = np.ones((10, 2))
    with pytest.raises(SingularDesignError):
        ols(np.arange(10.0), x)


def test_matrix_csv(tmp_path):
    """Written matrices read back exactly, bad cells report their line"""
    rng = np.random.default_rng(5)
    series = TimeSeriesMatrix(rng.standard_normal((7, 2)), labels=('y1', 'x1'))
    path = tmp_path / "data.csv"
    write_matrix_csv(series, path)
    back = read_matrix_csv(path)
    assert back.labels == ('y1', 'x1')
    np.testing.assert_array_equal(back.data, series.data)

    bad = tmp_path / "bad.csv"
    bad.write_text("y,x\n1,2\n3,abc\n", encoding='utf-8')
    with pytest.raises(DataFormatError) as info:
        read_matrix_csv(bad)
    assert info.value.line == 3


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
