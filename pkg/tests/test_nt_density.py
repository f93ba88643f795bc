import math

import numpy as np
import pytest

from ratioslab.nt_density import (
    archimedean_term,
    archimedean_term_tform,
    explicit_sum_S,
    explicit_sum_terms,
    nt_one_level_density,
    prime_power_window,
    s_even1_asymptotic,
    s_even2_main,
    s_even_direct,
    s_odd_direct,
)
from ratioslab.quadratic_characters import enumerate_discriminants
from ratioslab.special_fn import TruncationPolicy, bump_pair, fejer_pair

POL = TruncationPolicy()
# archimedean term at X = 1e3, sigma = 0.5; nu-quadrature and t-integral agree to 6e-14
ARCH_1E3 = 1.1482541050342276


@pytest.fixture(scope="module")
def d1e3():
    return enumerate_discriminants(1e3)


def test_prime_power_window():
    L = math.log(1e3 / (2 * math.pi))
    pairs = list(prime_power_window(L, 0.5))
    bound = math.exp(2 * 0.5 * L)
    assert all(p**k < bound for p, k in pairs)
    assert (2, 1) in pairs and (2, 7) in pairs and (2, 8) not in pairs
    assert pairs == sorted(pairs)


def test_explicit_sum_partitions(tau, d1e3):
    tf = fejer_pair(0.5)
    S = explicit_sum_S(d1e3, tau, tf, POL)
    e1, e2 = s_even_direct(d1e3, tau, tf, POL)
    odd = s_odd_direct(d1e3, tau, tf, POL)
    assert S == pytest.approx(e1 + e2 + odd, abs=1e-15)
    terms = explicit_sum_terms(d1e3, tau, tf)
    assert math.fsum(c for _, _, c in terms) == S
    assert s_odd_direct(d1e3, tau, tf, POL, absolute=True) >= abs(odd)


def test_archimedean_two_routes(d1e3):
    tf = fejer_pair(0.5)
    a = archimedean_term(d1e3, tf)
    assert a == pytest.approx(archimedean_term_tform(d1e3, tf), abs=1e-10)
    assert a == pytest.approx(ARCH_1E3, abs=1e-12)


def test_archimedean_bump_two_routes(d1e3):
    tf = bump_pair(0.5)
    assert archimedean_term(d1e3, tf) == pytest.approx(archimedean_term_tform(d1e3, tf), abs=1e-8)


def test_even2_main_two_routes(tau):
    tf = fejer_pair(0.5)
    for X in (1e3, 1.6e4):
        q = s_even2_main(X, tau, tf, POL)
        g = s_even2_main(X, tau, tf, POL, method="ghat")
        assert q == pytest.approx(g, abs=1e-12)
    with pytest.raises(ValueError):
        s_even2_main(1e3, tau, tf, POL, method="nope")


def test_even1_asymptotic_is_an_identity(tau, d1e3):
    # the prime-power sum and the log-derivative integral agree to quadrature accuracy
    tf = fejer_pair(0.5)
    e1, _ = s_even_direct(d1e3, tau, tf, POL)
    assert abs(e1 - s_even1_asymptotic(1e3, tau, tf, POL)) < 1e-9
    half, rest = s_even1_asymptotic(1e3, tau, tf, POL, parts=True)
    assert half == 0.25
    assert half + rest == pytest.approx(e1, abs=1e-9)


def test_mesh_refinement_is_stable(tau):
    tf = fejer_pair(0.5)
    a = s_even1_asymptotic(4e3, tau, tf, POL, mesh=1.0)
    b = s_even1_asymptotic(4e3, tau, tf, POL, mesh=2.0)
    assert a == pytest.approx(b, abs=1e-11)


def test_breakdown_totals(tau, d1e3):
    r = nt_one_level_density(1e3, 0.5, tau, POL, dset=d1e3)
    assert r.side == "NT"
    assert r.total == pytest.approx(r.archimedean + r.half_g0 + r.sym2_minus_zeta + r.even2_main, abs=1e-15)
    rec = r.as_record()
    assert list(rec)[:3] == ["side", "X", "sigma"]
    assert rec["remainder"] == 0.0 and rec["remainder_imag"] == 0.0


def test_window_beyond_table_raises(d1e3):
    from ratioslab.modular_arith import tau_series

    with pytest.raises(ValueError):
        s_odd_direct(enumerate_discriminants(1e4), tau_series(100), fejer_pair(0.5))
