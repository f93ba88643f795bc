"""Invariant suites behind `verify-special` and `verify-identities`."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modular_arith import TauTable, primes_up_to, tau_series
from .quadratic_characters import (
    count_divisible,
    discriminant_exp_sum,
    discriminant_exp_sum_closed,
    enumerate_discriminants,
)
from .ratios_side import (
    b_delta,
    b_delta_deriv_closed,
    b_delta_deriv_complex_step,
    b_delta_deriv_logform,
    b_delta_deriv_oracle,
    m_identity,
)
from .rmt_sim import KINDS, EnsembleSpec, ks_against_cdf, n1_cdf, sample_angles
from .special_fn import (
    TruncationPolicy,
    digamma,
    fejer_pair,
    l_sym2,
    zeta,
    zeta_logderiv,
)


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


def _check(name: str, value: float, bound: float) -> Check:
    return Check(name, bool(value <= bound), f"{value:.3e} <= {bound:.1e}")


def _grid_points(count: int, re_lo: float, re_hi: float, im_span: float, seed: int = 7):
    rng = np.random.default_rng(seed)
    return rng.uniform(re_lo, re_hi, count) + 1j * rng.uniform(-im_span, im_span, count)


# ---------------------------------------------------------------- special functions


def special_suite(tau: TauTable | None = None, pol: TruncationPolicy | None = None) -> list[Check]:
    tau = tau or tau_series(100_000)
    pol = pol or TruncationPolicy()
    out = []
    s = _grid_points(100, 1.0, 10.0, 30.0)
    rec = np.max(np.abs(digamma(s + 1) - digamma(s) - 1 / s))
    out.append(_check("digamma recurrence", rec, 1e-12))

    z = np.array([2.3 + 4.1j, 0.5 + 14.1j, -1.5 + 2j, 3.0 - 40j])
    refl = max(
        np.max(np.abs(zeta(np.conj(z)) - np.conj(zeta(z)))),
        np.max(np.abs(zeta_logderiv(np.conj(z)) - np.conj(zeta_logderiv(z)))),
        np.max(np.abs(digamma(np.conj(z)) - np.conj(digamma(z)))),
    )
    ls = np.array([0.6 + 3j, 1.2 + 7j, 2.7 - 2j])
    refl = max(refl, float(np.max(np.abs(l_sym2(np.conj(ls), tau, pol) - np.conj(l_sym2(ls, tau, pol))))))
    out.append(_check("Schwarz reflection", refl, 1e-12))

    ev = max(abs(zeta(2.0 + 0j) - math.pi**2 / 6), abs(zeta(4.0 + 0j) - math.pi**4 / 90))
    out.append(_check("zeta(2), zeta(4)", ev, 1e-12))

    doubled = TruncationPolicy(p_max=2 * pol.p_max, k_max=pol.k_max, tail_tol=pol.tail_tol)
    if doubled.p_max <= tau.n_max:
        pts = np.array([1.2 + 0j, 1.2 + 9j, 1.7 + 2j, 2.5 + 0j, 3.0 + 1j])
        mono = float(np.max(np.abs(l_sym2(pts, tau, doubled) - l_sym2(pts, tau, pol))))
        out.append(_check("l_sym2 p_max doubling", mono, pol.tail_tol))

    # Fejer transform: Riemann sum of g against e^{2 pi i x w} over a long window
    tf = fejer_pair(0.5)
    span, step = 4000.0, 0.01
    x = np.arange(-span, span, step) + step / 2
    gx = tf.g(x)
    w = np.linspace(-0.49, 0.49, 50)
    dft = np.array([np.sum(gx * np.cos(2 * math.pi * x * wi)) * step for wi in w])
    out.append(_check("Fejer transform", float(np.max(np.abs(dft - tf.g_hat(w)))), 1e-4))
    return out


# ---------------------------------------------------------------- arithmetic identities


def tau_suite(tau: TauTable, n_max: int = 10_000, star_bound: int = 100_000) -> list[Check]:
    n_max = min(n_max, tau.n_max)
    c = tau.coeffs
    bad_mult = 0
    for m in range(2, int(math.isqrt(n_max)) + 1):
        for n in range(m + 1, n_max // m + 1):
            if math.gcd(m, n) == 1 and c[m * n - 1] != c[m - 1] * c[n - 1]:
                bad_mult += 1
    bad_hecke = 0
    for p in primes_up_to(n_max).tolist():
        pk = p * p
        while pk <= n_max:
            if c[pk - 1] != c[p - 1] * c[pk // p - 1] - p**11 * c[pk // (p * p) - 1]:
                bad_hecke += 1
            pk *= p
    pr = primes_up_to(min(star_bound, tau.n_max))
    worst = float(np.max(np.abs(tau.star[pr])))
    return [
        Check("tau multiplicativity", bad_mult == 0, f"{bad_mult} failures"),
        Check("tau Hecke recursion", bad_hecke == 0, f"{bad_hecke} failures"),
        Check("|tau*(p)| <= 2", worst <= 2.0, f"max {worst:.15f}"),
    ]


def discriminant_suite(xs=(1e3, 1e4, 1e5)) -> list[Check]:
    out = []
    for X in xs:
        d = enumerate_discriminants(X)
        slack = 5 * math.sqrt(X)
        dev = abs(d.x_star - 3 * X / math.pi**2)
        for p in (2, 3, 5, 7):
            dev = max(dev, abs(count_divisible(d, p) - d.x_star / (p + 1)))
        out.append(_check(f"discriminant counts X={X:g}", dev, slack))
    return out


def exp_sum_suite(w: float = 0.2, nu: float = 1.0) -> list[Check]:
    devs = []
    for X in (1e4, 4e4):
        d = enumerate_discriminants(X)
        z = nu - 1j * w * d.L / math.pi
        closed = discriminant_exp_sum_closed(d, z)
        devs.append(abs(discriminant_exp_sum(d, z) - closed) / abs(closed))
    return [
        _check("exp-sum main term X=1e4", devs[0], 0.05),
        Check("exp-sum deviation non-increasing", devs[1] <= devs[0], f"{devs[1]:.3e} <= {devs[0]:.3e}"),
    ]


def ratios_suite(tau: TauTable, pol: TruncationPolicy | None = None) -> list[Check]:
    pol = pol or TruncationPolicy()
    m = max(abs(m_identity(p, y, tau)) for p in (2, 3, 101, 7919) for y in (0.0, 0.37, 5.0))
    diag = max(abs(b_delta(r, r, tau, pol) - 1) for r in (0j, 0.1j, 0.3 + 0.05j, -0.1 + 2j))
    ys = np.array([0.0, 0.2, 1.3, 7.5])
    closed = b_delta_deriv_closed(ys, tau, pol)
    logf = b_delta_deriv_logform(ys, tau, pol)
    oracle = np.array([b_delta_deriv_oracle(float(y), tau, pol) for y in ys])
    cs = b_delta_deriv_complex_step(tau, pol)
    dev = max(
        float(np.max(np.abs(closed - logf))),
        float(np.max(np.abs(closed - oracle))),
        abs(closed[0] - cs),
    )
    return [
        _check("M(p, y) = 0", m, 1e-12),
        _check("B(r; r) = 1", diag, 1e-8),
        _check("B' closed = five-factor = oracles", dev, 1e-7),
    ]


def sampler_suite(count: int = 100_000, seed: int = 0, threads: int | None = None) -> list[Check]:
    crit = 1.63 / math.sqrt(count)
    out = []
    for kind in KINDS:
        # the free angle itself; so_odd's forced eigenvalue at 0 is not part of the law
        v = sample_angles(EnsembleSpec(kind, 1), count, seed, threads)[:, 0]
        out.append(_check(f"N=1 KS {kind}", ks_against_cdf(v, n1_cdf(kind)), crit))
    return out


def identities_suite(tau: TauTable | None = None, pol: TruncationPolicy | None = None, threads: int | None = None) -> list[Check]:
    tau = tau or tau_series(100_000)
    return (
        tau_suite(tau)
        + discriminant_suite()
        + ratios_suite(tau, pol)
        + exp_sum_suite()
        + sampler_suite(threads=threads)
    )
