"""Number-theory side of the one-level density for quadratic twists of Delta."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from .modular_arith import TauTable, primes_up_to
from .numerics import fejer_cos_tail, gl_panels
from .quadratic_characters import (
    DiscriminantSet,
    chi_at_prime,
    count_divisible,
    enumerate_discriminants,
)
from .special_fn import (
    TestFunctionPair,
    TruncationPolicy,
    digamma,
    fejer_pair,
    zeta_logderiv_regular,
)

# head of every nu-integral runs over [0, NU_PERIODS / sigma]; Fejer tails are closed form
NU_PERIODS = 60.0
PANEL = 0.25
# prime powers feeding the closed-form tail of -zeta'/zeta
ZETA_TAIL_N = 200_000


@dataclass(frozen=True)
class DensityBreakdown:
    side: str
    X: float
    sigma: float
    archimedean: float
    half_g0: float
    sym2_minus_zeta: float
    even2_main: float
    odd_term: float
    remainder: complex
    total: float

    def as_record(self) -> dict:
        rec = asdict(self)
        r = complex(self.remainder)
        rec["remainder"] = r.real
        rec["remainder_imag"] = r.imag
        return rec


# ---------------------------------------------------------------- direct sums


def _need_primes(tau: TauTable, bound: float) -> np.ndarray:
    if bound > tau.n_max:
        raise ValueError(
            f"prime-power window reaches {bound:.0f}; tau table only covers {tau.n_max}"
        )
    primes = primes_up_to(int(math.floor(bound)))
    return primes


def _thetas(tau: TauTable, primes: np.ndarray) -> np.ndarray:
    return tau.prime_thetas[: primes.size]


def prime_power_window(L: float, sigma: float, half: bool = True):
    """(p, k) pairs with g_hat(k log p / (2L)) != 0 (half=True) or g_hat(k log p / L) != 0."""
    scale = 2.0 * L if half else L
    limit = sigma * scale
    primes = primes_up_to(int(math.floor(math.exp(limit))) + 1)
    for p in primes.tolist():
        lp = math.log(p)
        k = 1
        while k * lp < limit:
            yield p, k
            k += 1


def explicit_sum_terms(dset: DiscriminantSet, tau: TauTable, tf: TestFunctionPair):
    """Per-(p, k) contributions to S; ordering is p ascending then k."""
    L = dset.L
    xs = dset.x_star
    out = []
    pairs = list(prime_power_window(L, tf.sigma))
    if not pairs:
        return out
    _need_primes(tau, max(p for p, _ in pairs))
    thetas = {}
    chi_sums = {}
    for p, k in pairs:
        if p not in thetas:
            thetas[p] = float(np.arccos(np.clip(tau.star[p] / 2.0, -1.0, 1.0)))
        if k % 2 == 0:
            weight = xs - count_divisible(dset, p)
        else:
            if p not in chi_sums:
                chi_sums[p] = int(chi_at_prime(dset.members, p).sum())
            weight = chi_sums[p]
        pk = 2.0 * math.cos(k * thetas[p])
        lp = math.log(p)
        gh = float(tf.g_hat(k * lp / (2 * L)))
        out.append((p, k, -pk * lp / p ** (k / 2) * gh * weight / (L * xs)))
    return out


def explicit_sum_S(dset: DiscriminantSet, tau: TauTable, tf: TestFunctionPair, pol: TruncationPolicy | None = None) -> float:
    return math.fsum(c for _, _, c in explicit_sum_terms(dset, tau, tf))


def _even_pairs(L: float, sigma: float):
    # k = 2j in S: p^j < e^{sigma L}
    return list(prime_power_window(L, sigma, half=False))


def s_even_direct(dset: DiscriminantSet, tau: TauTable, tf: TestFunctionPair, pol: TruncationPolicy | None = None):
    """(even1, even2): the full-p part and the p | d correction of the even-k sum."""
    L = dset.L
    xs = dset.x_star
    e1, e2 = [], []
    for p, j in _even_pairs(L, tf.sigma):
        _need_primes(tau, p)
        th = float(np.arccos(np.clip(tau.star[p] / 2.0, -1.0, 1.0)))
        lp = math.log(p)
        base = 2.0 * math.cos(2 * j * th) * lp / p**j * float(tf.g_hat(j * lp / L)) / L
        e1.append(-base)
        e2.append(base * count_divisible(dset, p) / xs)
    return math.fsum(e1), math.fsum(e2)


def s_odd_direct(dset: DiscriminantSet, tau: TauTable, tf: TestFunctionPair, pol: TruncationPolicy | None = None, absolute: bool = False) -> float:
    """Odd-k part of S; absolute=True sums the moduli of the same terms."""
    L = dset.L
    xs = dset.x_star
    terms = []
    chi_sums = {}
    for p, k in prime_power_window(L, tf.sigma):
        if k % 2 == 0:
            continue
        _need_primes(tau, p)
        if p not in chi_sums:
            chi_sums[p] = int(chi_at_prime(dset.members, p).sum())
        th = float(np.arccos(np.clip(tau.star[p] / 2.0, -1.0, 1.0)))
        lp = math.log(p)
        c = -2.0 * math.cos(k * th) * lp / p ** (k / 2) * float(tf.g_hat(k * lp / (2 * L)))
        c *= chi_sums[p] / (L * xs)
        terms.append(abs(c) if absolute else c)
    return math.fsum(terms)


# ---------------------------------------------------------------- nu-integrals


def nu_grid(tf: TestFunctionPair, mesh: float = 1.0, periods: float | None = None):
    """Gauss-Legendre nodes on [0, V]; V is a whole number of Fejer periods."""
    periods = NU_PERIODS if periods is None else periods
    if tf.kind != "fejer":
        periods *= 8
    V = periods / tf.sigma
    nodes, weights = gl_panels(0.0, V, PANEL * mesh)
    return V, nodes, weights


def dirichlet_cos_tail(tf: TestFunctionPair, V: float, lam, coef) -> float:
    """int_V^inf g(v) sum_n coef_n cos(2 pi lam_n v) dv (zero for non-Fejer pairs)."""
    if tf.kind != "fejer":
        return 0.0
    lam = np.asarray(lam, dtype=np.float64)
    if lam.size == 0:
        return 0.0
    return math.fsum((np.asarray(coef) * fejer_cos_tail(lam, tf.sigma, V)).tolist())


def _g_tail_plain(tf: TestFunctionPair, V: float, f, laguerre: int = 40) -> float:
    """int_V^inf g(v) f(v) dv for slowly varying f (Fejer only)."""
    if tf.kind != "fejer":
        return 0.0
    s = tf.sigma
    # non-oscillating half: nu = V e^x, Gauss-Laguerre in x
    x, w = np.polynomial.laguerre.laggauss(laguerre)
    smooth = float(np.sum(w * f(V * np.exp(x)))) / V
    osc, _ = quad(lambda v: float(f(np.array([v]))[0]) / (v * v), V, np.inf, weight="cos", wvar=2 * math.pi * s, limlst=100)
    return (smooth - osc) / (2 * math.pi**2 * s)


def _prime_powers_upto(n: int):
    ps = primes_up_to(n)
    vals, logs = [], []
    for p in ps.tolist():
        lp = math.log(p)
        pk = p
        while pk <= n:
            vals.append(pk)
            logs.append(lp)
            pk *= p
    order = np.argsort(vals, kind="stable")
    return np.asarray(vals, dtype=np.float64)[order], np.asarray(logs)[order]


_PP_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _zeta_tail_series(n: int):
    if n not in _PP_CACHE:
        _PP_CACHE[n] = _prime_powers_upto(n)
    return _PP_CACHE[n]


def _sym2_window_terms(L: float, tau: TauTable, sigma: float):
    """Prime powers p^k inside the support window with coefficient (a^2k + 1 + abar^2k) log p."""
    ns, coefs = [], []
    for p, k in _even_pairs(L, sigma):
        _need_primes(tau, p)
        th = float(np.arccos(np.clip(tau.star[p] / 2.0, -1.0, 1.0)))
        ns.append(float(p) ** k)
        coefs.append((2.0 * math.cos(2 * k * th) + 1.0) * math.log(p))
    return np.asarray(ns), np.asarray(coefs)


def s_even1_asymptotic(X: float, tau: TauTable, tf: TestFunctionPair, pol: TruncationPolicy | None = None, mesh: float = 1.0, parts: bool = False):
    """g(0)/2 + (1/L) PV int g(v) [L'/L(sym^2) - zeta'/zeta](1 + 2 pi i v / L) dv.

    zeta'/zeta is analytic (Euler-Maclaurin); the 1/(s-1) pole is imaginary on the
    line and drops out of the even pairing. L'/L(sym^2) is the prime-power sum cut
    at the support window, since prime powers beyond it integrate to zero against g.
    """
    L = math.log(X / (2 * math.pi))
    V, nu, wt = nu_grid(tf, mesh)
    t = 2 * math.pi * nu / L
    s = 1.0 + 1j * t
    ns, coefs = _sym2_window_terms(L, tau, tf.sigma)
    lam_sym = np.log(ns) / L if ns.size else np.zeros(0)
    # Re L'/L(sym^2)(1+it) = -sum coef/n cos(t log n)
    re_sym = -(np.cos(np.multiply.outer(t, np.log(ns))) @ (coefs / ns)) if ns.size else 0.0 * t
    re_zeta = np.real(zeta_logderiv_regular(s))
    g = np.real(tf.g(nu))
    head = math.fsum((wt * g * (re_sym - re_zeta)).tolist())
    # tail: -zeta'/zeta = sum Lambda(n) n^{-s}, L'/L(sym^2) as above
    pp, lg = _zeta_tail_series(ZETA_TAIL_N)
    tail = dirichlet_cos_tail(tf, V, np.log(pp) / L, lg / pp)
    tail += dirichlet_cos_tail(tf, V, lam_sym, -coefs / ns)
    integral = 2.0 / L * (head + tail)
    half = 0.5 * tf.g0
    if parts:
        return half, integral
    return half + integral


def s_even2_main(X: float, tau: TauTable, tf: TestFunctionPair, pol: TruncationPolicy | None = None, method: str = "quadrature", mesh: float = 1.0) -> float:
    """(1/L) int g(v) sum_p log p/(p+1) sum_k (a^2k + abar^2k) p^{-k(1 + 2 pi i v / L)} dv."""
    pol = pol or TruncationPolicy()
    L = math.log(X / (2 * math.pi))
    if method == "ghat":
        terms = []
        for p, k in _even_pairs(L, tf.sigma):
            _need_primes(tau, p)
            th = float(np.arccos(np.clip(tau.star[p] / 2.0, -1.0, 1.0)))
            lp = math.log(p)
            terms.append(2 * math.cos(2 * k * th) * lp / (p**k * (p + 1)) * float(tf.g_hat(k * lp / L)))
        return math.fsum(terms) / L
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    from .ratios_side import b_delta_deriv_closed, b_delta_deriv_series

    V, nu, wt = nu_grid(tf, mesh)
    y = math.pi * nu / L
    vals = np.real(b_delta_deriv_closed(y, tau, pol))
    head = math.fsum((wt * np.real(tf.g(nu)) * vals).tolist())
    lam, coef = b_delta_deriv_series(tau, pol, L)
    tail = dirichlet_cos_tail(tf, V, lam, coef)
    return 2.0 / L * (head + tail)


def _mean_log(dset: DiscriminantSet) -> float:
    return math.fsum(dset.log_scaled.tolist()) / dset.x_star


def archimedean_term(dset: DiscriminantSet, tf: TestFunctionPair, mesh: float = 1.0) -> float:
    """(1/(2 L X*)) int g(v) sum_d [2 log(d/2pi) + psi(6 + i pi v/L) + psi(6 - i pi v/L)] dv."""
    if dset.x_star == 0:
        raise ValueError("empty discriminant set")
    L = dset.L
    V, nu, wt = nu_grid(tf, mesh)

    def re_psi(v):
        return np.real(digamma(6.0 + 1j * math.pi * np.asarray(v) / L))

    head = math.fsum((wt * np.real(tf.g(nu)) * re_psi(nu)).tolist())
    tail = _g_tail_plain(tf, V, re_psi)
    g_int = float(tf.g_hat(0.0))
    return (g_int * _mean_log(dset) + 2.0 * (head + tail)) / L


def archimedean_term_tform(dset: DiscriminantSet, tf: TestFunctionPair) -> float:
    """Same quantity from psi(z) = int_0^inf (e^{-t}/t - e^{-zt}/(1 - e^{-t})) dt."""
    L = dset.L
    g0 = float(tf.g_hat(0.0))
    psi6 = -0.5772156649015329 + 1 + 1 / 2 + 1 / 3 + 1 / 4 + 1 / 5
    cut = 2 * L * tf.sigma

    def f(t):
        return (g0 - float(tf.g_hat(t / (2 * L)))) * math.exp(-6 * t) / -math.expm1(-t)

    a, _ = quad(f, 0, cut, limit=200, epsabs=1e-14, epsrel=1e-13)
    b, _ = quad(f, cut, np.inf, limit=200, epsabs=1e-14, epsrel=1e-13)
    return (g0 * _mean_log(dset) + g0 * psi6 + a + b) / L


def nt_one_level_density(X: float, sigma: float, tau: TauTable, pol: TruncationPolicy | None = None, tf: TestFunctionPair | None = None, dset: DiscriminantSet | None = None, mesh: float = 1.0) -> DensityBreakdown:
    pol = pol or TruncationPolicy()
    tf = tf or fejer_pair(sigma)
    dset = dset or enumerate_discriminants(X)
    arch = archimedean_term(dset, tf, mesh)
    half, smz = s_even1_asymptotic(X, tau, tf, pol, mesh=mesh, parts=True)
    e2 = s_even2_main(X, tau, tf, pol, mesh=mesh)
    odd = s_odd_direct(dset, tau, tf, pol)
    total = math.fsum([arch, half, smz, e2])
    return DensityBreakdown(
        side="NT",
        X=float(X),
        sigma=float(sigma),
        archimedean=arch,
        half_g0=half,
        sym2_minus_zeta=smz,
        even2_main=e2,
        odd_term=odd,
        remainder=0j,
        total=total,
    )
