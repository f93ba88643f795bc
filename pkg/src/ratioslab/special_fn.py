"""Complex special functions, test-function pairs and the symmetric-square L-function."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import loggamma

from .modular_arith import TauTable, hecke_star, primes_up_to

EULER_GAMMA = 0.57721566490153286061

# B_2k / (2k)! for k = 1..9
_BERN = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510, 43867 / 798)
_BERN_OVER_FACT = tuple(b / math.factorial(2 * k) for k, b in enumerate(_BERN, start=1))


@dataclass(frozen=True)
class TruncationPolicy:
    p_max: int = 10000
    k_max: int = 20
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.p_max < 3 or self.k_max < 2 or not self.tail_tol > 0:
            raise ValueError("need p_max >= 3, k_max >= 2, tail_tol > 0")


# ---------------------------------------------------------------- test functions


@dataclass(frozen=True)
class TestFunctionPair:
    """Even g with transform g_hat(w) = int g(x) e^{2 pi i x w} dx supported in (-sigma, sigma)."""

    sigma: float
    kind: str
    g: Callable = field(repr=False, compare=False)
    g_hat: Callable = field(repr=False, compare=False)

    @property
    def g0(self) -> float:
        return float(np.real(self.g(0.0)))


def fejer_pair(sigma: float) -> TestFunctionPair:
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")

    def g(x):
        x = np.asarray(x)
        z = np.pi * sigma * x
        small = np.abs(z) < 1e-8
        zs = np.where(small, 1.0, z)
        return sigma * np.where(small, 1.0 - z * z / 3.0, (np.sin(zs) / zs) ** 2)

    def g_hat(w):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(w, dtype=np.float64)) / sigma)

    return TestFunctionPair(sigma=sigma, kind="fejer", g=g, g_hat=g_hat)


def bump_pair(sigma: float, nodes: int = 400) -> TestFunctionPair:
    """g_hat = exp(1 - 1/(1-(w/sigma)^2)) on (-sigma, sigma); g by Gauss-Legendre quadrature."""
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")

    def g_hat(w):
        r = np.asarray(w, dtype=np.float64) / sigma
        inside = np.abs(r) < 1
        rr = np.where(inside, r, 0.0)
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - rr * rr)), 0.0)

    @lru_cache(maxsize=8)
    def rule(n):
        x, wt = np.polynomial.legendre.leggauss(n)
        om = 0.5 * sigma * (x + 1.0)
        return om, 0.5 * sigma * wt * g_hat(om)

    def g(x_):
        x_ = np.asarray(x_)
        flat = x_.ravel()
        # the cosine makes ~sigma |x| oscillations over [0, sigma]; keep several nodes per half-period
        n = max(nodes, 64 * int(math.ceil((3 * sigma * float(np.max(np.abs(flat), initial=0.0)) + 64) / 64)))
        om, wt = rule(n)
        out = np.empty(flat.shape, dtype=np.result_type(flat, np.float64))
        for i in range(0, flat.size, 2048):
            out[i : i + 2048] = 2.0 * (np.cos(2 * np.pi * np.multiply.outer(flat[i : i + 2048], om)) @ wt)
        return out.reshape(x_.shape) if x_.ndim else out[0]

    return TestFunctionPair(sigma=sigma, kind="bump", g=g, g_hat=g_hat)


# ---------------------------------------------------------------- gamma family


def digamma(s):
    """psi(s) by upward recurrence to Re(s) >= 12 followed by the asymptotic series."""
    s = np.asarray(s, dtype=np.complex128)
    if np.any((s.imag == 0) & (s.real <= 0) & (s.real == np.round(s.real))):
        raise ValueError("digamma pole at a nonpositive integer")
    acc = np.zeros_like(s)
    z = s.copy()
    for _ in range(64):
        lo = z.real < 12
        if not lo.any():
            break
        acc = acc - np.where(lo, 1.0 / z, 0.0)
        z = np.where(lo, z + 1.0, z)
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for k in range(len(_BERN), 0, -1):
        series = series * inv2 + _BERN[k - 1] / (2 * k)
    out = acc + np.log(z) - 0.5 / z - series * inv2
    return out if out.ndim else complex(out)


def gamma_ratio(y, w):
    """Gamma(6 - w - iy) / Gamma(6 + w + iy) via log-Gamma."""
    if not -0.5 < w < 0.25:
        raise ValueError("w must lie in (-1/2, 1/4)")
    y = np.asarray(y, dtype=np.float64)
    out = np.exp(loggamma(6 - w - 1j * y) - loggamma(6 + w + 1j * y))
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------- zeta


def _zeta_parts(s: np.ndarray):
    """Z(s) = (s-1) zeta(s) and Z'(s) by Euler-Maclaurin, elementwise."""
    Z = np.empty_like(s)
    dZ = np.empty_like(s)
    cut = (20 + np.ceil(np.abs(s.imag))).astype(np.int64)
    for n_cut in np.unique(cut):
        idx = np.flatnonzero(cut == n_cut)
        ss = s[idx]
        n = np.arange(1, n_cut, dtype=np.float64)
        logn = np.log(n)
        terms = np.exp(-np.multiply.outer(ss, logn))
        head = terms.sum(axis=1)
        dhead = -(terms * logn).sum(axis=1)
        N = float(n_cut)
        lN = math.log(N)
        Ns = np.exp(-ss * lN)
        # T(s) = N^{-s}/2 + sum_k B2k/(2k)! (s)_{2k-1} N^{-s-2k+1}
        T = 0.5 * Ns
        dT = -lN * 0.5 * Ns
        poch = ss.copy()
        dpoch = np.ones_like(ss)
        for k, c in enumerate(_BERN_OVER_FACT[:8], start=1):
            if k > 1:
                for j in (2 * k - 3, 2 * k - 2):
                    dpoch = dpoch * (ss + j) + poch
                    poch = poch * (ss + j)
            pw = Ns * N ** (1 - 2 * k)
            T = T + c * poch * pw
            dT = dT + c * (dpoch - lN * poch) * pw
        N1s = N * Ns
        Z[idx] = (ss - 1) * (head + T) + N1s
        dZ[idx] = head + T + (ss - 1) * (dhead + dT) - lN * N1s
    return Z, dZ


def zeta(s):
    s_arr = np.asarray(s, dtype=np.complex128)
    if np.any(s_arr == 1):
        raise ValueError("zeta has a pole at s = 1")
    Z, _ = _zeta_parts(s_arr.ravel())
    out = (Z / (s_arr.ravel() - 1)).reshape(s_arr.shape)
    return out if out.ndim else complex(out)


def zeta_logderiv(s):
    s_arr = np.asarray(s, dtype=np.complex128)
    if np.any(s_arr == 1):
        raise ValueError("zeta has a pole at s = 1")
    out = (zeta_logderiv_regular(s_arr) - 1.0 / (s_arr - 1)).reshape(s_arr.shape)
    return out if out.ndim else complex(out)


def zeta_logderiv_regular(s):
    """zeta'/zeta(s) + 1/(s-1), analytic at s = 1."""
    s_arr = np.asarray(s, dtype=np.complex128)
    Z, dZ = _zeta_parts(s_arr.ravel())
    out = (dZ / Z).reshape(s_arr.shape)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------- symmetric square


@lru_cache(maxsize=8)
def _sym2_prime_data(tau: TauTable, p_max: int):
    primes = primes_up_to(min(p_max, tau.n_max))
    theta = tau.prime_thetas[: primes.size]
    return primes, theta


def sym2_coefficients(tau: TauTable, n_max: int) -> np.ndarray:
    """Dirichlet coefficients a(n) of L(sym^2, s), n = 0..n_max (a(0) = 0)."""
    if n_max > tau.n_max:
        raise ValueError("tau table too short for the requested coefficients")
    primes = primes_up_to(n_max)
    t2 = hecke_star(tau.prime_thetas[: primes.size], 2)
    a = np.zeros(n_max + 1)
    a[1] = 1.0
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for p in primes[::-1]:
        spf[p::p] = p
    local: dict[int, list[float]] = {}
    for p, t in zip(primes.tolist(), t2.tolist()):
        # local factor 1 / (1 - t x + t x^2 - x^3)
        c = [1.0]
        pk = p
        while pk <= n_max:
            k = len(c)
            c.append(
                t * c[k - 1] - t * (c[k - 2] if k >= 2 else 0.0) + (c[k - 3] if k >= 3 else 0.0)
            )
            pk *= p
        local[p] = c
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        a[n] = a[m] * local[p][k]
    return a


def _sym2_euler_log(s: np.ndarray, tau: TauTable, pol: TruncationPolicy) -> np.ndarray:
    primes, theta = _sym2_prime_data(tau, pol.p_max)
    out = np.zeros(s.shape, dtype=np.complex128)
    logp = np.log(primes.astype(np.float64))
    for k in range(1, pol.k_max + 1):
        ck = 2 * np.cos(2 * k * theta) + 1.0
        out += (np.exp(-np.multiply.outer(s * k, logp)) @ ck) / k
    return out


def l_sym2_euler(s, tau: TauTable, pol: TruncationPolicy):
    """Truncated Euler product; needs Re(s) > 1."""
    s_arr = np.asarray(s, dtype=np.complex128)
    if np.any(s_arr.real <= 1):
        raise ValueError("Euler product needs Re(s) > 1")
    out = np.exp(_sym2_euler_log(s_arr.ravel(), tau, pol)).reshape(s_arr.shape)
    return out if out.ndim else complex(out)


def l_sym2_logderiv(s, tau: TauTable, pol: TruncationPolicy):
    """L'/L(sym^2, s) = -sum_p sum_k (a^2k + 1 + abar^2k) log p / p^{ks}, truncated by pol.

    On Re(s) = 1 the sharp cut is the regularization: the dropped prime powers sit
    outside every band-limited window that the density integrals probe.
    """
    s_arr = np.asarray(s, dtype=np.complex128)
    if np.any(s_arr.real < 1) or np.any((s_arr.real == 1) & (s_arr.imag == 0)):
        raise ValueError("logderiv needs Re(s) > 1, or Re(s) = 1 off the real axis")
    primes, theta = _sym2_prime_data(tau, pol.p_max)
    logp = np.log(primes.astype(np.float64))
    flat = s_arr.ravel()
    out = np.zeros(flat.shape, dtype=np.complex128)
    for k in range(1, pol.k_max + 1):
        ck = (2 * np.cos(2 * k * theta) + 1.0) * logp
        out -= np.exp(-np.multiply.outer(flat * k, logp)) @ ck
    out = out.reshape(s_arr.shape)
    return out if out.ndim else complex(out)


def _log_gamma_factor(s):
    # Gamma_R(s+1) Gamma_R(s+11) Gamma_R(s+12), Gamma_R(s) = pi^{-s/2} Gamma(s/2)
    return (
        -(3 * s + 24) / 2 * math.log(math.pi)
        + loggamma((s + 1) / 2)
        + loggamma((s + 11) / 2)
        + loggamma((s + 12) / 2)
    )


def afe_length(t_abs: float, B: float = 8.0) -> int:
    """Dirichlet terms the smoothed AFE needs at height |t|."""
    y0 = ((t_abs + 13.0) / (2 * math.pi)) ** 1.5
    return int(math.ceil(y0 * math.exp(math.sqrt(140.0 / B)))) + 10


class Sym2AFE:
    """Smoothed approximate functional equation for L(sym^2 Delta, s) in the strip.

    Completed function Lambda(s) = Gamma_R(s+1) Gamma_R(s+11) Gamma_R(s+12) L(s) = Lambda(1-s).
    The Mellin weight is G(u) = exp(u^2 / B) on the vertical line Re(u) = c.
    """

    def __init__(self, tau: TauTable, B: float = 8.0, c: float = 1.0, v_max: float = 32.0):
        self.tau = tau
        self.B = B
        self.c = c
        self.v_max = v_max

    def n_terms(self, t_abs: float) -> int:
        n = afe_length(t_abs, self.B)
        if n > self.tau.n_max:
            raise ValueError(f"AFE needs {n} coefficients; tau table has {self.tau.n_max}")
        return n

    @lru_cache(maxsize=4)
    def _coeffs(self, n: int) -> np.ndarray:
        return sym2_coefficients(self.tau, n)

    def _weights(self, h: float):
        K = int(math.ceil(self.v_max / h))
        k = np.arange(-K, K + 1)
        u = self.c + 1j * h * k
        return k, u, (h / (2 * math.pi)) * np.exp(u * u / self.B) / u

    def __call__(self, s):
        """Pointwise evaluation at arbitrary s (small batches)."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=np.complex128))
        h = 0.1
        _, u, wts = self._weights(h)
        n = self.n_terms(float(np.abs(s_arr.imag).max()))
        a = self._coeffs(n)[1:]
        logn = np.log(np.arange(1, n + 1, dtype=np.float64))
        pw = np.exp(-np.multiply.outer(logn, u))  # n^{-u}
        out = np.empty(s_arr.shape, dtype=np.complex128)
        for i, si in enumerate(s_arr):
            lg_s = _log_gamma_factor(si)
            # the dual weight carries gamma(1-s)/gamma(s) folded in
            v1 = pw @ (wts * np.exp(_log_gamma_factor(si + u) - lg_s))
            v2 = pw @ (wts * np.exp(_log_gamma_factor(1 - si + u) - lg_s))
            first = np.sum(a * np.exp(-si * logn) * v1)
            second = np.sum(a * np.exp(-(1 - si) * logn) * v2)
            out[i] = first + second
        return out if np.ndim(s) else complex(out[0])

    def on_line(self, re: float, t0: float, h: float, count: int) -> np.ndarray:
        """L(re + i(t0 + j h)) for j = 0..count-1, sharing one uniform frequency grid."""
        k, u, wts = self._weights(h)
        K = k[-1]
        j = np.arange(count)
        t = t0 + h * j
        n = self.n_terms(max(abs(t0), abs(t[-1])))
        a = self._coeffs(n)[1:]
        logn = np.log(np.arange(1, n + 1, dtype=np.float64))
        # first sum lives on Re = re + c at heights t0 + m h, m = -K .. count-1+K
        m1 = np.arange(-K, count + K)
        d1 = _dirichlet_grid(a * np.exp(-(re + self.c) * logn), logn, t0 + h * m1[0], h, m1.size)
        lg1 = _log_gamma_factor(re + self.c + 1j * (t0 + h * m1))
        # dual sum lives on Re = 1 - re + c at heights -t0 + m h, m = -K-(count-1) .. K
        m2 = np.arange(-K - (count - 1), K + 1)
        d2 = _dirichlet_grid(
            a * np.exp(-(1 - re + self.c) * logn), logn, -t0 + h * m2[0], h, m2.size
        )
        lg2 = _log_gamma_factor(1 - re + self.c + 1j * (-t0 + h * m2))
        s = re + 1j * t
        lg_s = _log_gamma_factor(s)
        out = np.empty(count, dtype=np.complex128)
        for jj in range(count):
            i1 = jj + k + K  # index of m = jj + k in m1
            i2 = k - jj - m2[0]  # index of m = k - jj in m2
            first = np.sum(wts * np.exp(lg1[i1] - lg_s[jj]) * d1[i1])
            second = np.sum(wts * np.exp(lg2[i2] - lg_s[jj]) * d2[i2])
            out[jj] = first + second
        return out


def _dirichlet_grid(b: np.ndarray, logn: np.ndarray, t_start: float, h: float, count: int):
    """sum_n b_n exp(-i (t_start + m h) log n) for m = 0..count-1."""
    out = np.empty(count, dtype=np.complex128)
    step = np.exp(-1j * h * logn)
    block = 64
    for m0 in range(0, count, block):
        cur = b * np.exp(-1j * (t_start + h * m0) * logn)
        for m in range(m0, min(count, m0 + block)):
            out[m] = cur.sum()
            cur = cur * step
    return out


@lru_cache(maxsize=4)
def _default_afe(tau: TauTable) -> Sym2AFE:
    return Sym2AFE(tau)


def l_sym2(s, tau: TauTable, pol: TruncationPolicy, convergent_re: float = 2.5):
    """L(sym^2 Delta, s): Euler product for Re(s) >= convergent_re, functional equation otherwise."""
    s_arr = np.asarray(s, dtype=np.complex128)
    flat = s_arr.ravel()
    out = np.empty(flat.shape, dtype=np.complex128)
    euler = flat.real >= convergent_re
    if euler.any():
        out[euler] = np.exp(_sym2_euler_log(flat[euler], tau, pol))
    if (~euler).any():
        out[~euler] = np.atleast_1d(_default_afe(tau)(flat[~euler]))
    out = out.reshape(s_arr.shape)
    return out if out.ndim else complex(out)


@lru_cache(maxsize=4)
def sym2_at_one(tau: TauTable) -> float:
    """delta = L(sym^2 Delta, 1)."""
    return float(np.real(_default_afe(tau)(1.0 + 0j)))
