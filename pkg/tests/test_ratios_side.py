import math

import numpy as np
import pytest

from ratioslab.nt_density import s_even2_main
from ratioslab.quadratic_characters import enumerate_discriminants
from ratioslab.ratios_side import (
    b_delta,
    b_delta_deriv_closed,
    b_delta_deriv_complex_step,
    b_delta_deriv_logform,
    b_delta_deriv_oracle,
    b_factors,
    b_prime_integral,
    local_factor,
    m_identity,
    rc_one_level_density,
    remainder_R,
    tau_size_for,
)
from ratioslab.special_fn import TruncationPolicy, fejer_pair

POL = TruncationPolicy()
# dB/d alpha at the origin, p_max = 1e4; closed form, five-factor form and complex step agree
B_PRIME_0 = -0.5184011471442703
# shifted-contour remainder at X = 1e3, sigma = 0.5, w = 0.2 (w = 0.15 agrees to 1e-11 relative)
R_SHIFTED_1E3 = 0.009253433911539736


def test_diagonal_is_one(tau):
    for r in (0j, 0.2j, 0.1 + 0.3j, -0.15 - 1j):
        assert abs(b_delta(r, r, tau, POL) - 1) < 1e-12
        # the accelerated product restores full zeta factors, so the p > p_max tail
        # of (1 - q^2)(1 + q^2) = 1 - q^4, q = p^{-1-2r}, shows up here
        assert abs(b_delta(r, r, tau, POL, accelerate=True) - 1) < 1e-8


def test_local_factor_diagonal(tau):
    for p in (2, 3, 7919):
        f = b_factors(p, 0.1j, 0.1j, tau)
        assert abs(f.local - 1) < 1e-14


def test_local_factor_shape(tau):
    p, v = local_factor(0.1, 0.05, tau, POL)
    assert p.size == 1229 and np.shape(v) == (1229,)  # primes below 1e4


def test_shift_range_rejected(tau):
    with pytest.raises(ValueError):
        b_delta(-0.3, 0.1, tau, POL)


def test_acceleration_converges_faster(tau):
    lo, hi = TruncationPolicy(p_max=1000), TruncationPolicy(p_max=100_000)
    a, g = -0.2, 0.2
    acc = abs(b_delta(a, g, tau, lo, accelerate=True) - b_delta(a, g, tau, hi, accelerate=True))
    raw = abs(b_delta(a, g, tau, lo) - b_delta(a, g, tau, hi))
    assert acc < raw / 50


@pytest.mark.parametrize("p", [2, 3, 101, 7919])
@pytest.mark.parametrize("y", [0.0, 0.37, 5.0])
def test_m_identity_vanishes(tau, p, y):
    assert abs(m_identity(p, y, tau)) < 1e-13


def test_derivative_routes(tau):
    ys = np.array([0.0, 0.4, 3.0])
    c = b_delta_deriv_closed(ys, tau, POL)
    assert np.max(np.abs(c - b_delta_deriv_logform(ys, tau, POL))) < 1e-14
    for y, v in zip(ys, c):
        assert abs(v - b_delta_deriv_oracle(float(y), tau, POL)) < 1e-10
    assert b_delta_deriv_complex_step(tau, POL) == pytest.approx(c[0].real, abs=1e-14)
    assert c[0].real == pytest.approx(B_PRIME_0, abs=1e-14)


def test_b_prime_integral_matches_nt_main(tau):
    tf = fejer_pair(0.5)
    for X in (1e3, 4e3):
        assert b_prime_integral(X, tau, tf, POL) == pytest.approx(s_even2_main(X, tau, tf, POL, method="ghat"), abs=1e-12)


@pytest.fixture(scope="module")
def rem1e3(tau):
    return remainder_R(1e3, fejer_pair(0.5), 0.2, tau, POL)


def test_remainder_pole_and_golden(rem1e3):
    assert rem1e3.pole == 0.25
    assert rem1e3.shifted.real == pytest.approx(R_SHIFTED_1E3, rel=1e-9)
    assert abs(rem1e3.shifted.imag) < 1e-15
    assert rem1e3.total == rem1e3.pole + rem1e3.shifted


def test_remainder_contour_independent(tau, rem1e3):
    # no poles between the two contours, so the shifted integral must not move
    other = remainder_R(1e3, fejer_pair(0.5), 0.15, tau, POL)
    assert other.shifted.real == pytest.approx(rem1e3.shifted.real, rel=1e-8)


def test_remainder_direct_dsum_near_closed(tau, rem1e3):
    direct = remainder_R(1e3, fejer_pair(0.5), 0.2, tau, POL, direct_dsum=True)
    assert direct.shifted.real == pytest.approx(rem1e3.shifted.real, rel=0.25)


def test_remainder_w_range(tau):
    with pytest.raises(ValueError):
        remainder_R(1e3, fejer_pair(0.5), 0.25, tau, POL)


def test_rc_breakdown_without_remainder(tau):
    r = rc_one_level_density(1e3, 0.5, tau, POL, include_remainder=False)
    assert r.side == "RC" and r.remainder == 0 and r.odd_term == 0.0
    assert r.total == pytest.approx(r.archimedean + 0.25 + r.sym2_minus_zeta + r.even2_main, abs=1e-15)


def test_tau_size_for():
    assert tau_size_for(1e4) >= 10_001
    assert tau_size_for(1e3) > tau_size_for(1e4)  # AFE height grows as L shrinks
