import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.special import eval_chebyt, eval_jacobi, poch

from koornwalk.orthopoly import (
    JacobiParams,
    chebyshev_T,
    chebyshev_U,
    jacobi_derivative_tables,
    jacobi_eval,
    jacobi_table,
    log_pochhammer,
    pochhammer,
    sup_norm_estimate,
)

AB = [(-0.5, -0.5), (0.0, 0.0), (0.5, -0.25), (-0.75, 2.0), (3.0, 0.5)]
X = np.linspace(-1, 1, 41)


@pytest.mark.parametrize("x, n", [(0.5, 0), (0.5, 3), (1.0, 10), (-2.5, 4), (-3.0, 5), (7.25, 6)])
def test_pochhammer_matches_scipy(x, n):
    assert_allclose(pochhammer(x, n), poch(x, n), rtol=1e-14)


def test_pochhammer_overflow():
    with pytest.raises(OverflowError):
        pochhammer(10.0, 400)
    logabs, sign = log_pochhammer(10.0, 400)
    assert sign == 1.0
    assert_allclose(logabs, math.lgamma(410.0) - math.lgamma(10.0), rtol=1e-14)


@pytest.mark.parametrize("x, n", [(-2.5, 3), (-0.5, 1), (0.5, 20)])
def test_log_pochhammer_sign(x, n):
    logabs, sign = log_pochhammer(x, n)
    direct = pochhammer(x, n)
    assert sign == math.copysign(1.0, direct)
    assert_allclose(logabs, math.log(abs(direct)), rtol=1e-13)


def test_log_pochhammer_zero_product():
    assert log_pochhammer(-3.0, 5) == (-math.inf, 0.0)
    with pytest.raises(ValueError):
        pochhammer(1.0, -1)


def test_jacobi_params_validation():
    with pytest.raises(ValueError):
        JacobiParams(-1.0, 0.0)
    with pytest.raises(ValueError):
        JacobiParams(0.0, -1.5)


@pytest.mark.parametrize("a, b", AB)
def test_jacobi_table_matches_scipy(a, b):
    tab = jacobi_table(a, b, 40, X)
    want = np.array([eval_jacobi(n, a, b, X) for n in range(41)])
    assert_allclose(tab, want, rtol=1e-11, atol=1e-11)


@pytest.mark.parametrize("a, b", AB)
def test_jacobi_endpoint_value(a, b):
    n = np.arange(31)
    want = [poch(a + 1, k) / math.factorial(k) for k in n]
    assert_allclose(jacobi_table(a, b, 30, 1.0), want, rtol=1e-12)


@pytest.mark.parametrize("a, b", AB)
def test_jacobi_derivatives_by_finite_differences(a, b):
    x = np.linspace(-0.9, 0.9, 13)
    p, dp, ddp = jacobi_derivative_tables(a, b, 12, x, order=2)
    h = 1e-5
    fd = (jacobi_table(a, b, 12, x + h) - jacobi_table(a, b, 12, x - h)) / (2 * h)
    assert_allclose(dp, fd, rtol=1e-7, atol=1e-6)
    fd2 = (jacobi_derivative_tables(a, b, 12, x + h)[1] - jacobi_derivative_tables(a, b, 12, x - h)[1]) / (2 * h)
    assert_allclose(ddp, fd2, rtol=1e-6, atol=1e-4)


def test_jacobi_eval_scalar_and_derivative():
    params = JacobiParams(0.5, -0.25)
    val = jacobi_eval(params, 7, 0.3, derivative=True)
    assert isinstance(val.value, float)
    assert_allclose(val.value, eval_jacobi(7, 0.5, -0.25, 0.3), rtol=1e-13)
    want = 0.5 * (7 + 0.5 - 0.25 + 1) * eval_jacobi(6, 1.5, 0.75, 0.3)
    assert_allclose(val.derivative, want, rtol=1e-13)
    assert jacobi_eval(params, 0, 0.3, derivative=True).derivative == 0.0


@pytest.mark.parametrize("n", [0, 1, 2, 5, 17, 64])
def test_chebyshev_T_matches_scipy(n):
    assert_allclose(chebyshev_T(n, X), eval_chebyt(n, X), atol=1e-13)


def _u_reference(n, x):
    # U_{k+1} = 2x U_k - U_{k-1} at 50 digits, started from the same binary x
    with mpmath.workdps(50):
        x = mpmath.mpf(float(x))
        prev, cur = mpmath.mpf(0), mpmath.mpf(1)
        for _ in range(n):
            prev, cur = cur, 2 * x * cur - prev
        return float(cur)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 17, 64])
def test_chebyshev_U_against_mpmath(n):
    # U_n is ill conditioned near +-1, hence the degree-scaled absolute slack
    want = np.array([_u_reference(n, x) for x in X])
    got = chebyshev_U(n, X)
    assert_allclose(got, want, rtol=1e-11, atol=1e-11 * (n + 1) ** 2)


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_chebyshev_endpoints(n):
    assert chebyshev_T(n, 1.0) == 1.0
    assert chebyshev_T(n, -1.0) == (-1.0) ** n
    assert chebyshev_U(n, 1.0) == n + 1
    assert chebyshev_U(n, -1.0) == (-1.0) ** n * (n + 1)


def test_chebyshev_U_minus_one():
    assert chebyshev_U(-1, 0.3) == 0.0
    with pytest.raises(ValueError):
        chebyshev_U(-2, 0.3)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(0, 200), x=st.floats(-1, 1))
def test_chebyshev_bounds(n, x):
    assert abs(chebyshev_T(n, x)) <= 1.0 + 1e-15
    assert abs(chebyshev_U(n, x)) <= n + 1 + 1e-9


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 60), x=st.floats(-0.999, 0.999))
def test_chebyshev_recurrence(n, x):
    # T_{n+1} = 2x T_n - T_{n-1} and T_n = (U_n - U_{n-2}) / 2
    lhs = chebyshev_T(n + 1, x)
    rhs = 2 * x * chebyshev_T(n, x) - chebyshev_T(n - 1, x)
    assert abs(lhs - rhs) <= 1e-12 * (n + 1)
    tu = 0.5 * (chebyshev_U(n, x) - chebyshev_U(n - 2, x))
    assert abs(chebyshev_T(n, x) - tu) <= 1e-9 * (n + 1) ** 2


@pytest.mark.parametrize("n", [1, 3, 8, 25])
def test_sup_norm_of_T_and_U(n):
    assert_allclose(sup_norm_estimate(lambda x: chebyshev_T(n, x), n), 1.0, rtol=1e-14)
    assert_allclose(sup_norm_estimate(lambda x: chebyshev_U(n, x), n), n + 1, rtol=1e-14)


def test_sup_norm_interior_maximum():
    # x(1 - x^2) peaks at 1/sqrt(3) with value 2/(3 sqrt 3)
    est = sup_norm_estimate(lambda x: x * (1 - x * x), 3)
    assert_allclose(est, 2 / (3 * math.sqrt(3)), rtol=1e-12)
    assert est <= 2 / (3 * math.sqrt(3)) + 1e-16
