from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from koornwalk.chain import (
    ChainSpec,
    RecurrenceCoeffs,
    SiteCoeffs,
    _solve_site,
    chain_stationary,
    chebyshev_tail,
    coefficients,
    coeffs_chebyshev,
    coeffs_general,
    direct_pi_closed_form,
    lambda_min,
    printed_pi_closed_form,
    reversibility,
    shift,
    stationary,
)
from koornwalk.errors import NegativeEntry, NotPositiveRecurrent, NotStabilized, SingularSystem, Underflow
from koornwalk.koornwinder import KoornwinderParams, q_table

CHEB1 = KoornwinderParams.of(-0.5, -0.5, 1.0)
GENERAL = [(0.0, 0.0, 1.0), (0.5, -0.25, 1.0), (2.0, 1.0, 5.0), (-0.3, 0.4, 0.1), (0.0, 0.0, 0.0)]


def _exact_cheb(big_n, n):
    # (q, r, p) in rationals
    big_n = Fraction(big_n)
    if n == 0:
        return 0, big_n / (big_n + 1), 1 / (big_n + 1)
    lo, hi = 1 + (2 * n - 1) * big_n, 1 + (2 * n + 1) * big_n
    return hi / (2 * lo), -2 * big_n**2 / (lo * hi), lo / (2 * hi)


@pytest.mark.parametrize(
    "big_n, n, want",
    [
        (1, 0, (0, Fraction(1, 2), Fraction(1, 2))),
        (1, 1, (1, Fraction(-1, 4), Fraction(1, 4))),
        (1, 2, (Fraction(3, 4), Fraction(-1, 12), Fraction(1, 3))),
        (2, 0, (0, Fraction(2, 3), Fraction(1, 3))),
        (2, 1, (Fraction(7, 6), Fraction(-8, 21), Fraction(3, 14))),
    ],
)
def test_chebyshev_coefficients_exact(big_n, n, want):
    site = coeffs_chebyshev(float(big_n), n)
    assert site.site == n
    assert_allclose([site.q, site.r, site.p], [float(v) for v in want], rtol=0, atol=1e-16)


@pytest.mark.parametrize("big_n", [Fraction(1, 10), Fraction(1), Fraction(7, 2)])
def test_chebyshev_table_against_rationals(big_n):
    tab = coefficients(KoornwinderParams.of(-0.5, -0.5, float(big_n)), 40)
    for n in range(41):
        q, r, p = _exact_cheb(big_n, n)
        assert_allclose([tab.q[n], tab.r[n], tab.p[n]], [float(q), float(r), float(p)], rtol=1e-15, atol=1e-17)


def test_chebyshev_large_site_limit():
    site = coeffs_chebyshev(1.0, 10**6)
    assert abs(site.p - 0.5) < 1e-6 and abs(site.q - 0.5) < 1e-6 and abs(site.r) < 1e-12
    tab = coefficients(CHEB1, 2000)
    assert np.all(np.diff(tab.p[1:]) > 0) and np.all(np.diff(tab.q[1:]) < 0)


def test_legendre_recurrence():
    site = coeffs_general(KoornwinderParams.of(0.0, 0.0, 0.0), 1)
    assert_allclose([site.q, site.r, site.p], [1 / 3, 0.0, 2 / 3], atol=1e-15)


@pytest.mark.parametrize("big_n", [0.1, 1.0, 10.0])
def test_general_matches_closed_form(big_n):
    gen = coefficients(KoornwinderParams.of(-0.5, -0.5, big_n), 0)  # closed form path
    assert gen.size == 1
    params = KoornwinderParams.of(-0.5, -0.5, big_n)
    for n in range(51):
        a, b = coeffs_general(params, n), coeffs_chebyshev(big_n, n)
        assert_allclose([a.q, a.r, a.p], [b.q, b.r, b.p], atol=1e-12)


@pytest.mark.parametrize("a, b, big_n", GENERAL)
def test_rows_sum_to_one(a, b, big_n):
    tab = coefficients(KoornwinderParams.of(a, b, big_n), 300)
    assert tab.q[0] == 0.0
    assert_allclose(tab.p + tab.r + tab.q, 1.0, atol=1e-12)
    assert np.all(tab.p > 0) and np.all(tab.q[1:] > 0)


@pytest.mark.parametrize("a, b, big_n", GENERAL + [(-0.5, -0.5, 3.0)])
def test_recurrence_residual_at_random_points(a, b, big_n):
    params = KoornwinderParams.of(a, b, big_n)
    x = np.random.default_rng(7).uniform(-1, 1, 10)
    m = 60
    tab = coefficients(params, m)
    qt = q_table(params, m + 1, x)
    lhs = tab.p[:, None] * qt[1:] + tab.r[:, None] * qt[:-1]
    lhs[1:] += tab.q[1:, None] * qt[:-2]
    scale = np.maximum(np.abs(qt).max(axis=0), 1.0)
    assert np.abs((lhs - x * qt[:-1]) / scale).max() < 1e-9


def test_solve_site_singular():
    z = np.zeros(4)
    with pytest.raises(SingularSystem) as info:
        _solve_site(1, z, z, z, z, z)
    assert info.value.site == 1


@pytest.mark.parametrize(
    "a, b, big_n, want",
    [(-0.5, -0.5, 1.0, 0.25), (-0.5, -0.5, 1e-4, 2e-8 / (1.0001 * 1.0003)), (0.0, 0.0, 0.0, 0.0)],
)
def test_lambda_min_values(a, b, big_n, want):
    assert_allclose(lambda_min(KoornwinderParams.of(a, b, big_n)), want, rtol=1e-14, atol=1e-300)


@pytest.mark.parametrize("a, b, big_n", GENERAL[:4])
def test_lambda_min_general_is_largest_negative_diagonal(a, b, big_n):
    params = KoornwinderParams.of(a, b, big_n)
    lam = lambda_min(params)
    r = coefficients(params, 3000).r
    assert_allclose(lam, max(0.0, -r.min()), rtol=1e-12)
    shifted = shift(coefficients(params, 3000), lam)
    assert shifted.r.min() >= 0


@pytest.mark.parametrize("big_n", [0.1, 0.5, 1.0, 2.0, 10.0])
def test_lambda_min_chebyshev_matches_scan(big_n):
    tab = coefficients(KoornwinderParams.of(-0.5, -0.5, big_n), 1000)
    assert_allclose(lambda_min(tab.params), -tab.r.min(), rtol=1e-14)


def test_lambda_min_not_stabilized():
    with pytest.raises(NotStabilized):
        lambda_min(KoornwinderParams.of(-0.3, 0.4, 0.1), n_scan=8)


def test_shift_examples():
    lam = 0.25
    s1 = shift(coeffs_chebyshev(1.0, 1), lam)
    assert_allclose([s1.q, s1.r, s1.p], [0.8, 0.0, 0.2], atol=1e-16)
    assert s1.shifted
    s0 = shift(coeffs_chebyshev(1.0, 0), lam)
    assert_allclose([s0.q, s0.r, s0.p], [0.0, 0.6, 0.4], atol=1e-16)
    raw = coeffs_chebyshev(1.0, 0)
    ident = shift(raw, 0.0)
    assert (ident.q, ident.r, ident.p) == (raw.q, raw.r, raw.p)


def test_shift_rejects_small_lambda_with_site():
    with pytest.raises(NegativeEntry) as info:
        shift(coefficients(CHEB1, 10), 0.2)
    assert info.value.site == 1 and info.value.which == "r"
    assert "site 1" in str(info.value)
    with pytest.raises(NegativeEntry):
        shift(coeffs_chebyshev(1.0, 1), 0.2)
    with pytest.raises(ValueError):
        shift(coeffs_chebyshev(1.0, 1), -1.0)


@settings(max_examples=60, deadline=None)
@given(big_n=st.floats(0.01, 50.0), extra=st.floats(0.0, 3.0))
def test_shifted_rows_are_stochastic(big_n, extra):
    params = KoornwinderParams.of(-0.5, -0.5, big_n)
    lam = lambda_min(params) + extra
    tab = shift(coefficients(params, 200), lam)
    assert tab.r.min() >= 0 and tab.p.min() > 0 and tab.q[1:].min() > 0
    assert_allclose(tab.p + tab.r + tab.q, 1.0, atol=1e-14)


def test_reversibility_chebyshev_values():
    pi = reversibility(coefficients(CHEB1, 10)).values
    assert_allclose(pi[:5], [1, 1 / 2, 1 / 6, 1 / 12, 1 / 20], rtol=1e-15)
    assert_allclose(pi[1:], [1 / (n * (n + 1)) for n in range(1, 11)], rtol=1e-14)


@pytest.mark.parametrize("big_n", [0.1, 0.5, 2.0, 10.0])
def test_reversibility_direct_closed_form(big_n):
    pi = reversibility(coefficients(KoornwinderParams.of(-0.5, -0.5, big_n), 50)).values
    want = [direct_pi_closed_form(big_n, n) for n in range(51)]
    assert_allclose(pi, want, rtol=1e-13)


def test_printed_form_differs_by_factor_n():
    assert_allclose(direct_pi_closed_form(2.0, 1), 2 / 7, rtol=1e-15)
    assert_allclose(printed_pi_closed_form(2.0, 1), 4 / 7, rtol=1e-15)
    for big_n in (0.5, 1.0, 3.0):
        for n in (1, 5, 20):
            assert_allclose(printed_pi_closed_form(big_n, n), big_n * direct_pi_closed_form(big_n, n), rtol=1e-15)


@pytest.mark.parametrize("a, b, big_n", GENERAL[:4] + [(-0.5, -0.5, 2.0)])
def test_detailed_balance_and_shift_invariance(a, b, big_n):
    params = KoornwinderParams.of(a, b, big_n)
    raw = coefficients(params, 200)
    lam = lambda_min(params) + 0.1
    sh = shift(raw, lam)
    pi = reversibility(raw).values
    assert_allclose(reversibility(sh).values, pi, rtol=1e-12)
    assert_allclose(pi[:-1] * sh.p[:-1], pi[1:] * sh.q[1:], rtol=1e-12)


@pytest.mark.parametrize("big_n", [0.1, 1.0, 10.0])
def test_pi_decays_like_inverse_square(big_n):
    # n^2 pi_n lies in [2(1+N)/(5N^2), 2(1+N)/(3N^2)] once n >= max(10, 10/N)
    pi = reversibility(coefficients(KoornwinderParams.of(-0.5, -0.5, big_n), 5000)).values
    start = int(max(10, 10 / big_n))
    n = np.arange(start, pi.size)
    scaled = n**2 * pi[start:]
    assert scaled.min() >= 2 * (1 + big_n) / (5 * big_n**2)
    assert scaled.max() <= 2 * (1 + big_n) / (3 * big_n**2)


@pytest.mark.parametrize("big_n, m", [(1.0, 0), (1.0, 10), (0.1, 100), (10.0, 7)])
def test_chebyshev_tail_telescopes(big_n, m):
    pi = reversibility(coefficients(KoornwinderParams.of(-0.5, -0.5, big_n), 200_000)).values
    assert_allclose(chebyshev_tail(big_n, m), pi[m + 1 :].sum() + chebyshev_tail(big_n, 200_000), rtol=1e-12)


@pytest.mark.parametrize("big_n, rho, nu0", [(1.0, 2.0, 0.5), (2.0, 1.5, 2 / 3), (0.1, 11.0, 1 / 11)])
def test_stationary_chebyshev(big_n, rho, nu0):
    spec = ChainSpec.of(-0.5, -0.5, big_n)
    measure, nu = chain_stationary(spec, 100)
    assert_allclose(measure.rho, rho, rtol=1e-14)
    assert_allclose(measure.closed_form_rho, rho, rtol=1e-15)
    assert_allclose(nu.probabilities[0], nu0, rtol=1e-14)
    assert_allclose(nu.probabilities.sum() + nu.mass_deficit, 1.0, atol=1e-14)
    assert nu.method == "stationary"


def test_stationary_n1_values():
    _, nu = chain_stationary(ChainSpec.of(-0.5, -0.5, 1.0), 50)
    n = np.arange(1, 51)
    assert_allclose(nu.probabilities[1:], 1 / (2 * n * (n + 1)), rtol=1e-14)


def test_stationary_is_invariant():
    spec = ChainSpec.of(-0.5, -0.5, 1.0, 0.25)
    m = 10_000
    _, nu = chain_stationary(spec, m)
    c = spec.coeffs(m)
    v = nu.probabilities
    out = v * c.r
    out[1:] += v[:-1] * c.p[:-1]
    out[:-1] += v[1:] * c.q[1:]
    # the boundary row loses mass p_M nu_M outward and misses inflow; both are O(1/M^2)
    assert np.abs(out - v)[:-1].sum() < 1e-10


@pytest.mark.parametrize("a, b", [(-0.5, -0.5), (0.0, 0.0)])
def test_no_stationary_without_atom(a, b):
    with pytest.raises(NotPositiveRecurrent):
        chain_stationary(ChainSpec.of(a, b, 0.0), 400)


def test_general_rho_matches_atom():
    measure, _ = chain_stationary(ChainSpec.of(0.5, -0.25, 2.0), 2000)
    assert_allclose(1 / measure.rho, 2 / 3, rtol=1e-9)


def test_underflow_detected():
    p = np.full(200, 1e-3)
    q = np.concatenate(([0.0], np.full(199, 0.9)))
    r = 1 - p - q
    with pytest.raises(Underflow):
        reversibility(RecurrenceCoeffs(p, r, q))


def test_reversibility_rejects_zero_rates():
    p = np.array([0.5, 0.0, 0.5])
    q = np.array([0.0, 0.5, 0.5])
    with pytest.raises(ValueError):
        reversibility(RecurrenceCoeffs(p, 1 - p - q, q))


def test_chain_spec_validation():
    with pytest.raises(ValueError):
        ChainSpec.of(-0.5, -0.5, 1.0, -0.1)
    with pytest.raises(ValueError):
        ChainSpec.of(-0.5, -0.5, 1.0, 0.25, origin=-1)
    spec = ChainSpec.of(-0.5, -0.5, 1.0)
    assert spec.lam == 0.25
    assert isinstance(spec.coeffs(3).site(1), SiteCoeffs)


def test_stationary_rejects_heavy_tail():
    measure = reversibility(coefficients(KoornwinderParams.of(-0.5, -0.5, 0.0), 100))
    with pytest.raises(NotPositiveRecurrent):
        stationary(measure)
