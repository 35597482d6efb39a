import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetnet.specfun import (
    ConvergenceError,
    Hyp2F1Params,
    gamma_ratio,
    gauss_2f1_neg,
    log_gamma,
    log_gauss_2f1_neg,
    log_pochhammer,
    sinc_norm,
)
from oracles import gamma_by_recurrence, hyp2f1_direct, hyp2f1_pfaff_a


@pytest.mark.parametrize(
    "args, expected",
    [
        ((1.0, 1.0, 2.0, 1.0), math.log(2.0)),
        ((-0.5, 1.0, 0.5, 1.0), 1.0 + math.pi / 4),
        ((0.0, 3.0, 1.5, 7.0), 1.0),
        ((1.0, 2.0, 3.0, 0.0), 1.0),
    ],
)
def test_closed_form_values(args, expected):
    assert gauss_2f1_neg(Hyp2F1Params(*args)) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "a, b, c, x",
    [
        (-0.5, 2, 0.5, 1.0),
        (-0.5, 5, 0.5, 31.6),
        (0.5, 3, 1.5, 100.0),
        (1.5, 4, 2.5, 0.3),
        (-0.2, 1, 0.8, 3.0),
        (2.4, 8, 3.4, 1e3),
    ],
)
def test_matches_mpmath(a, b, c, x):
    ref = float(mpmath.hyp2f1(a, b, c, -x))
    assert gauss_2f1_neg(Hyp2F1Params(a, b, c, x)) == pytest.approx(ref, rel=2e-12)


def test_log_form_matches_linear():
    for a, b, c, x in [(-0.5, 2, 0.5, 5.0), (1.5, 9, 2.5, 40.0)]:
        v = gauss_2f1_neg(Hyp2F1Params(a, b, c, x))
        assert math.exp(log_gauss_2f1_neg(a, b, c, x)) == pytest.approx(v, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(
    i=st.integers(0, 8),
    U=st.integers(1, 6),
    delta=st.floats(0.4, 0.8),
    x=st.floats(0.0, 0.5),
)
def test_pfaff_route_agrees_with_direct_series(i, U, delta, x):
    a, b, c = i - delta, U + i, i + 1 - delta
    direct = hyp2f1_direct(a, b, c, -x)
    assert gauss_2f1_neg(Hyp2F1Params(a, b, c, x)) == pytest.approx(direct, rel=1e-10, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(i=st.integers(1, 6), U=st.integers(1, 6), delta=st.floats(0.4, 0.8), x=st.floats(0.0, 50.0))
def test_other_pfaff_form_oracle(i, U, delta, x):
    a, b, c = i - delta, U + i, i + 1 - delta
    assert gauss_2f1_neg(Hyp2F1Params(a, b, c, x)) == pytest.approx(hyp2f1_pfaff_a(a, b, c, x), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(i=st.integers(1, 6), U=st.integers(1, 5), delta=st.floats(0.4, 0.8), x=st.floats(0.01, 20.0))
def test_positive_a_decreasing_in_x(i, U, delta, x):
    # with a, b > 0 every term of the series at -x alternates and the value falls with x
    a, b, c = i - delta, U + i, i + 1 - delta
    lo = gauss_2f1_neg(Hyp2F1Params(a, b, c, x))
    hi = gauss_2f1_neg(Hyp2F1Params(a, b, c, x * 1.5))
    assert 0 < hi < lo <= 1


def test_parameter_validation():
    with pytest.raises(ValueError):
        Hyp2F1Params(1, 1, 0.0, 1.0)
    with pytest.raises(ValueError):
        Hyp2F1Params(1, 1, 2.0, -0.5)


def test_convergence_error_is_arithmetic():
    assert issubclass(ConvergenceError, ArithmeticError)


@pytest.mark.parametrize("x", [1.0, 2.5, 4.0, 5.5, 7.0])
def test_log_gamma(x):
    assert log_gamma(x) == pytest.approx(math.log(gamma_by_recurrence(x)), rel=1e-13, abs=1e-14)


@pytest.mark.parametrize("a, d", [(1, 0.5), (3, 0.5), (5, 0.5), (2, 0.4), (10, 0.8)])
def test_gamma_ratio(a, d):
    assert gamma_ratio(a, d) == pytest.approx(math.gamma(a + d) / math.gamma(a), rel=1e-13)


def test_gamma_ratio_domain():
    with pytest.raises(ValueError):
        gamma_ratio(2, 1.0)


def test_log_pochhammer():
    assert math.exp(log_pochhammer(3.0, 4)) == pytest.approx(3 * 4 * 5 * 6)
    assert log_pochhammer(2.5, 0) == 0.0


@settings(max_examples=50, deadline=None)
@given(d=st.floats(0.05, 0.95))
def test_sinc_identity(d):
    assert sinc_norm(d) == pytest.approx(math.sin(math.pi * d) / (math.pi * d), rel=1e-13)
    assert sinc_norm(d) == pytest.approx(1.0 / (math.gamma(1 + d) * math.gamma(1 - d)), rel=1e-12)


def test_sinc_half():
    assert sinc_norm(0.5) == pytest.approx(2 / math.pi, rel=1e-15)
    assert np.isfinite(sinc_norm(1e-9))
