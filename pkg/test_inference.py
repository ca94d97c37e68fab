#!/usr/bin/env python3
"""
Test script for t and Wald inference, the rank condition and the
hyperconsistency rate
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import json

import numpy as np
import pytest

from core.dgp import DgpSpec, dgp1, simulate
from core.errors import DegenerateVarianceError, DomainError
from core.fmols import FitSummary, fm_ols
from core.inference import (GeneralRestriction, LinearRestriction, TensorRestriction,
                            delta_exponent, delta_rate, full_restriction, normal_pvalue,
                            parse_restriction, rank_condition_check, standard_error, t_statistic,
                            t_value, vec, wald, wald_rate_exponent, wald_trace_form)
from core.kernels import parse_kernel
from core.series import SystemData

PARZEN = parse_kernel('parzen')


def _scalar_fit(T=400, seed=2):
    return fm_ols(simulate(dgp1(0.5), T, seed), PARZEN, T ** 0.25)


def _matrix_fit(T=500, seed=6):
    spec = DgpSpec(A=[[1.0, 0.5], [-1.0, 2.0]], ma_coeffs=(0.3 * np.eye(4),), sigma=np.eye(4))
    return fm_ols(simulate(spec, T, seed), PARZEN, T ** 0.25)


def test_delta_rate_examples():
    assert delta_rate(100, 0.3) == pytest.approx(1000.0)
    assert delta_rate(100, 0.1) == pytest.approx(251.19, rel=1e-4)
    assert delta_rate(100, 0.7) == pytest.approx(398.11, rel=1e-4)
    # continuous at both breakpoints
    assert delta_exponent(0.25) == pytest.approx(1.5)
    assert delta_exponent(0.25 - 1e-12) == pytest.approx(1.5)
    assert delta_exponent(0.5) == pytest.approx(1.5)
    assert delta_exponent(0.5 + 1e-12) == pytest.approx(1.5)
    for k in (0.0, 1.0):
        with pytest.raises(DomainError):
            delta_rate(100, k)
    with pytest.raises(DomainError):
        delta_rate(0, 0.3)


def test_wald_rate_exponent():
    assert wald_rate_exponent(0.2) == pytest.approx(-0.4)
    assert wald_rate_exponent(0.3) == pytest.approx(-0.4)
    with pytest.raises(DomainError):
        wald_rate_exponent(0.4)


def test_t_value_example():
    """A+ = 0.83 with se 0.01 against A0 = 1 gives t = -17"""
    assert t_value(0.83, 1.0, 0.01) == pytest.approx(-17.0)
    assert normal_pvalue(-17.0) < 1e-50
    with pytest.raises(DomainError):
        t_value(1.0, 1.0, 0.0)


def test_wald_equals_t_squared():
    """With a single restriction the Wald statistic is t^2"""
    fit = _scalar_fit()
    t = t_statistic(fit, 1.99)
    result = wald(fit, full_restriction([[1.99]]))
    assert result.statistic == pytest.approx(t ** 2, rel=1e-10)
    assert result.q_nominal == result.q_effective == 1
    assert not result.degenerate
    assert result.p_nominal == pytest.approx(normal_pvalue(t), rel=1e-8)


def test_standard_error_formula():
    summary = FitSummary(A_plus=np.array([[0.9]]), omega_cond=np.array([[4.0]]),
                         xtx=np.array([[100.0]]), T=50)
    assert standard_error(summary) == pytest.approx(0.2)
    assert t_statistic(summary, 1.0) == pytest.approx(-0.5)


def test_full_restriction_trace_form():
    """Kronecker form and trace form of W_I agree"""
    fit = _matrix_fit()
    A0 = [[1.0, 0.5], [-1.0, 2.0]]
    result = wald(fit, full_restriction(A0))
    assert result.statistic == pytest.approx(wald_trace_form(fit, A0), rel=1e-10)
    assert result.q_nominal == 4


def test_tensor_matches_linear():
    fit = _matrix_fit()
    tensor = TensorRestriction(R1=[[1.0, -1.0]], R2=[[1.0], [0.0]], R3=[[2.0]])
    linear = tensor.as_linear()
    assert linear.Q.shape == (1, 4)
    np.testing.assert_allclose(linear.Q @ vec(fit.A_plus),
                               (tensor.R1 @ fit.A_plus @ tensor.R2).reshape(-1))
    assert wald(fit, tensor).statistic == pytest.approx(wald(fit, linear).statistic, rel=1e-12)


def test_invariance_to_left_multiplication():
    """Testing C A = C A0 on (C y) gives the same statistic as A = A0 on y"""
    spec = DgpSpec(A=[[1.0], [2.0]], ma_coeffs=(0.2 * np.eye(3),), sigma=np.eye(3))
    data = simulate(spec, 300, 12)
    C = np.array([[1.0, 2.0], [-1.0, 0.5]])
    A0 = np.array([[1.0], [2.0]])
    base = wald(fm_ols(data, PARZEN, 4.0), full_restriction(A0))
    moved_data = SystemData(y=data.y.data @ C.T, x=data.x, x0=data.x0)
    moved = wald(fm_ols(moved_data, PARZEN, 4.0), full_restriction(C @ A0))
    assert moved.statistic == pytest.approx(base.statistic, rel=1e-8)


def test_rank_condition():
    xtx = np.array([[50.0]])
    full = rank_condition_check(full_restriction([[1.0]]), np.array([[2.0]]), xtx)
    assert full.satisfied and full.q_effective == 1

    zero = rank_condition_check(full_restriction([[1.0]]), np.array([[0.0]]), xtx)
    assert not zero.satisfied and zero.q_effective == 0

    # rank(R1 Omega R1') * q2 with a rank-one Omega_00.x
    rank_one = rank_condition_check(full_restriction(np.zeros((2, 1))),
                                    np.array([[1.0, 1.0], [1.0, 1.0]]), xtx)
    assert (rank_one.q_nominal, rank_one.q_effective) == (2, 1)

    linear = rank_condition_check(LinearRestriction(Q=[[1.0, 1.0]], r0=[0.0]),
                                  np.array([[1.0, 1.0], [1.0, 1.0]]), xtx)
    assert linear.satisfied


@pytest.mark.parametrize("scale", [1e-4, 1e4])
def test_wald_does_not_depend_on_units(scale):
    """Rescaling y (and the null) leaves W, t and the rank decision unchanged"""
    data = simulate(dgp1(0.5), 400, 2)
    base_fit = fm_ols(data, PARZEN, 400 ** 0.25)
    base = wald(base_fit, full_restriction([[2.0]]))

    scaled_data = SystemData(y=data.y.data * scale, x=data.x, x0=data.x0)
    fit = fm_ols(scaled_data, PARZEN, 400 ** 0.25)
    t = t_statistic(fit, 2.0 * scale)
    result = wald(fit, full_restriction([[2.0 * scale]]))
    assert t == pytest.approx(t_statistic(base_fit, 2.0), rel=1e-8)
    assert result.statistic == pytest.approx(base.statistic, rel=1e-8)
    assert result.statistic == pytest.approx(t ** 2, rel=1e-8)
    assert not result.degenerate
    assert rank_condition_check(full_restriction([[2.0 * scale]]), fit.omega_cond, fit.xtx,
                                omega_00=fit.lr.omega_00).satisfied

    restored = FitSummary.from_dict(json.loads(json.dumps(fit.to_dict())))
    assert wald(restored, full_restriction([[2.0 * scale]])).statistic == \
        pytest.approx(result.statistic, rel=1e-8)


def test_rank_decision_uses_unconditional_scale():
    """A conditional variance tiny next to Omega_00 counts as zero, in any units"""
    xtx = np.array([[50.0]])
    for unit in (1.0, 1e-12):
        flagged = rank_condition_check(full_restriction([[1.0]]), np.array([[1e-10 * unit]]), xtx,
                                       omega_00=np.array([[unit]]))
        assert not flagged.satisfied
        kept = rank_condition_check(full_restriction([[1.0]]), np.array([[1e-3 * unit]]), xtx,
                                    omega_00=np.array([[unit]]))
        assert kept.satisfied
    # without a reference the matrix's own scale is used
    assert rank_condition_check(full_restriction([[1.0]]), np.array([[1e-20]]), xtx).satisfied


def test_degenerate_wald():
    """A zero conditional variance raises unless pseudo-inversion is allowed"""
    summary = FitSummary(A_plus=np.array([[1.2]]), omega_cond=np.array([[0.0]]),
                         xtx=np.array([[80.0]]), T=40)
    with pytest.raises(DegenerateVarianceError) as info:
        wald(summary, full_restriction([[1.0]]))
    assert info.value.effective_rank == 0

    result = wald(summary, full_restriction([[1.0]]), allow_degenerate=True)
    assert result.degenerate
    assert result.q_effective == 0
    assert result.statistic == 0.0
    assert result.p_effective == 1.0
    assert result.notes

    with pytest.raises(DegenerateVarianceError):
        standard_error(summary)


def test_general_restriction_finite_difference():
    """A numerical Jacobian gives the delta-method statistic of the analytic one"""
    fit = _scalar_fit()
    phi = lambda a: np.array([a[0] ** 2 - 4.0])
    analytic = wald(fit, GeneralRestriction(phi, jacobian=lambda a: np.array([[2.0 * a[0]]])))
    numeric = wald(fit, GeneralRestriction(phi))
    assert numeric.statistic == pytest.approx(analytic.statistic, rel=1e-5)
    assert any('finite differences' in note for note in numeric.notes)
    assert not analytic.notes


def test_restriction_validation():
    with pytest.raises(DomainError):
        LinearRestriction(Q=[[1.0, 1.0], [2.0, 2.0]], r0=[0.0, 0.0])
    with pytest.raises(DomainError):
        TensorRestriction(R1=np.eye(2), R2=np.eye(1), R3=np.zeros((1, 1)))
    with pytest.raises(DomainError):
        t_statistic(_matrix_fit(T=100), 1.0)


def test_parse_restriction():
    tensor = parse_restriction("A0=2", 1, 1)
    assert isinstance(tensor, TensorRestriction)
    np.testing.assert_array_equal(tensor.R3, [[2.0]])

    matrix = parse_restriction("A0=1,0.5;-1,2", 2, 2)
    np.testing.assert_array_equal(matrix.R3, [[1.0, 0.5], [-1.0, 2.0]])

    linear = parse_restriction("Q=1,0;0,1|r0=2;3", 1, 2)
    assert isinstance(linear, LinearRestriction)
    np.testing.assert_array_equal(linear.r0, [2.0, 3.0])

    for text in ("B=1", "A0=1,2", "A0=x", "Q=1,0"):
        with pytest.raises(DomainError):
            parse_restriction(text, 1, 1)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
