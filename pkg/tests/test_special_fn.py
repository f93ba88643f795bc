import math

import mpmath as mp
import numpy as np
import pytest

from ratioslab.special_fn import (
    Sym2AFE,
    TruncationPolicy,
    bump_pair,
    digamma,
    fejer_pair,
    gamma_ratio,
    l_sym2,
    l_sym2_euler,
    l_sym2_logderiv,
    sym2_at_one,
    sym2_coefficients,
    zeta,
    zeta_logderiv,
    zeta_logderiv_regular,
)

POINTS = [2.0 + 0j, 0.5 + 14.134725j, 1 + 3j, -2.5 + 7j, 1.1 - 250j, 3.3 + 40j]

# L(sym^2 Delta, 1); B-independent to 1e-15, frozen from the smoothed functional equation
DELTA = 0.6317929457278839


def test_truncation_policy_validation():
    assert TruncationPolicy() == TruncationPolicy(10000, 20, 1e-8)
    for bad in ({"p_max": 2}, {"k_max": 1}, {"tail_tol": 0.0}):
        with pytest.raises(ValueError):
            TruncationPolicy(**bad)


@pytest.mark.parametrize("s", POINTS)
def test_zeta_against_mpmath(s):
    zs = mp.mpc(s.real, s.imag)
    ref = complex(mp.zeta(zs))
    assert abs(zeta(s) - ref) <= 1e-10 * max(1.0, abs(ref))
    if abs(ref) > 1e-3:  # next to a zero the log-derivative is ill-conditioned
        ld = complex(mp.zeta(zs, derivative=1) / mp.zeta(zs))
        assert abs(zeta_logderiv(s) - ld) <= 1e-10 * max(1.0, abs(ld))


def test_zeta_logderiv_regular_removes_pole():
    s = 1 + 1e-7j
    assert zeta_logderiv_regular(s) == pytest.approx(complex(mp.euler), abs=1e-6)
    s = 2 + 1j
    assert zeta_logderiv_regular(s) == pytest.approx(zeta_logderiv(s) + 1 / (s - 1), rel=1e-14)


@pytest.mark.parametrize("s", [0.3 + 0.2j, 1.0 + 0j, 5 - 3j, 11.5 + 60j, -3.5 + 1j])
def test_digamma_against_mpmath(s):
    ref = complex(mp.digamma(mp.mpc(s.real, s.imag)))
    assert abs(digamma(s) - ref) <= 1e-13 * max(1.0, abs(ref))


def test_digamma_pole():
    with pytest.raises(ValueError):
        digamma(-2.0)


def test_gamma_ratio():
    y, w = 3.7, 0.2
    ref = complex(mp.gamma(mp.mpc(6 - w, -y)) / mp.gamma(mp.mpc(6 + w, y)))
    assert gamma_ratio(y, w) == pytest.approx(ref, rel=1e-12)
    assert abs(gamma_ratio(11.0, 0.0)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        gamma_ratio(0.0, 0.3)


def test_fejer_pair_values():
    tf = fejer_pair(0.5)
    assert tf.g0 == pytest.approx(0.5)
    assert tf.g(2.0) == pytest.approx(0.0, abs=1e-17)  # sin(pi) = 0
    assert tf.g_hat(0.25) == pytest.approx(0.5)
    assert tf.g_hat(0.6) == 0.0
    with pytest.raises(ValueError):
        fejer_pair(1.0)


def test_bump_pair_transform_roundtrip():
    tf = bump_pair(0.5)
    x = np.linspace(-200, 200, 400_001)
    gx = tf.g(x)
    for w in (0.0, 0.1, 0.3):
        num = np.trapezoid(gx * np.cos(2 * math.pi * x * w), x)
        assert num == pytest.approx(float(tf.g_hat(w)), abs=1e-6)


def test_sym2_coefficients_match_euler_product(tau):
    a = sym2_coefficients(tau, 2000)
    # prime values: a(p) = tau*(p)^2 - 1
    for p in (2, 3, 5, 1999):
        assert a[p] == pytest.approx(tau.star[p] ** 2 - 1, abs=1e-12)
    # Dirichlet series at s = 4 vs the Euler product
    n = np.arange(1, 2001, dtype=float)
    ds = float(np.sum(a[1:] * n**-4.0))
    assert ds == pytest.approx(l_sym2_euler(4.0 + 0j, tau, TruncationPolicy(p_max=2000)).real, rel=1e-9)


def test_afe_matches_euler_product(tau):
    pol = TruncationPolicy(p_max=100_000)
    for s in (2.0 + 0j, 2 + 10j, 2.2 - 4j):
        assert abs(Sym2AFE(tau)(s) - l_sym2_euler(s, tau, pol)) < 1e-8


def test_afe_is_independent_of_smoothing(tau):
    s = np.array([0.6 + 5j, 1.0 + 0j, 0.6 - 40j])
    v = [Sym2AFE(tau, B=B)(s) for B in (6.0, 8.0, 12.0)]
    assert np.max(np.abs(v[0] - v[1])) < 1e-9
    assert np.max(np.abs(v[2] - v[1])) < 1e-9


def test_afe_on_line_equals_pointwise(tau):
    afe = Sym2AFE(tau)
    h = 0.05
    grid = afe.on_line(0.6, -3.0, h, 121)
    for j in (0, 37, 120):
        assert grid[j] == pytest.approx(afe(0.6 + 1j * (-3.0 + j * h)), abs=1e-10)


def test_delta_golden(tau):
    assert sym2_at_one(tau) == pytest.approx(DELTA, abs=1e-12)


def test_l_sym2_routing(tau):
    pol = TruncationPolicy()
    assert l_sym2(3.0 + 0j, tau, pol) == l_sym2_euler(3.0 + 0j, tau, pol)
    assert l_sym2(1.0 + 0j, tau, pol) == pytest.approx(DELTA, abs=1e-12)
    s = np.array([1.2 + 1j, 1.2 - 1j])
    v = l_sym2(s, tau, pol)
    assert v[0] == pytest.approx(np.conj(v[1]), abs=1e-14)


def test_l_sym2_logderiv_finite_difference(tau):
    pol = TruncationPolicy(p_max=100_000, k_max=30)
    s, h = 3.0 + 1j, 1e-5
    fd = (np.log(l_sym2_euler(s + h, tau, pol)) - np.log(l_sym2_euler(s - h, tau, pol))) / (2 * h)
    assert l_sym2_logderiv(s, tau, pol) == pytest.approx(fd, abs=1e-8)
    with pytest.raises(ValueError):
        l_sym2_logderiv(0.9 + 0j, tau, pol)
