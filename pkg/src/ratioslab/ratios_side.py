"""Ratios-conjecture side: the B_Delta Euler product, its derivative, the remainder and the comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modular_arith import TauTable, primes_up_to
from .numerics import ordered_map
from .nt_density import (
    DensityBreakdown,
    archimedean_term,
    dirichlet_cos_tail,
    nt_one_level_density,
    nu_grid,
    s_even1_asymptotic,
)
from .quadratic_characters import (
    DiscriminantSet,
    discriminant_exp_sum_closed,
    enumerate_discriminants,
)
from .special_fn import (
    Sym2AFE,
    afe_length,
    TestFunctionPair,
    TruncationPolicy,
    fejer_pair,
    gamma_ratio,
    sym2_at_one,
    zeta,
)

W_DEFAULT = 0.2


def _prime_data(tau: TauTable, p_max: int):
    if p_max > tau.n_max:
        raise ValueError(f"p_max={p_max} exceeds tau table range {tau.n_max}")
    primes = primes_up_to(p_max)
    t = tau.star[primes]
    return primes.astype(np.float64), t


@dataclass(frozen=True)
class BFactors:
    p: int
    f1: complex
    f2: complex
    f3: complex
    f4: complex
    f5: complex

    @property
    def local(self) -> complex:
        return self.f1 * self.f2 * self.f3 / (self.f4 * self.f5)


def _factors(p, t, alpha, gamma):
    """f1..f5 with every m-series in closed form.

    With Q(x) = (1 - a^2 x)(1 - abar^2 x) = 1 - (t^2 - 2) x + x^2:
      sum_m tau*(p^2m) x^m = (1 + x) / Q(x),  sum_m tau*(p^{2m+1}) x^m = t / Q(x).
    """
    logp = np.log(p)
    q = np.exp(-(1 + 2 * alpha) * logp)
    r = np.exp(-(1 + 2 * gamma) * logp)
    u = np.exp(-(1 + alpha + gamma) * logp)
    c2 = t * t - 2.0
    t2 = t * t - 1.0
    Q = 1.0 - c2 * q + q * q
    even = (1.0 + q) / Q
    odd = t / Q
    rho = p / (p + 1.0)
    f1 = 1.0 + rho * (even - 1.0 - t * u * odd + r * even)
    f2 = 1.0 - t2 * q + t2 * q * q - q**3
    f3 = 1.0 - r
    f4 = 1.0 - t2 * u + t2 * u * u - u**3
    f5 = 1.0 - u
    return f1, f2, f3, f4, f5


def b_factors(p: int, alpha: complex, gamma: complex, tau: TauTable) -> BFactors:
    t = float(tau.star[p])
    vals = _factors(np.float64(p), t, complex(alpha), complex(gamma))
    return BFactors(p, *(complex(v) for v in vals))


def _check_shifts(alpha, gamma):
    a, g = np.real(alpha), np.real(gamma)
    ok = (
        np.all(2 + 4 * a > 1)
        and np.all(2 + 3 * a + g > 1)
        and np.all(1 + 2 * g > 0)
        and np.all(1 + a + g > 0)
    )
    if not ok:
        raise ValueError("shifts outside the convergence range of the B_Delta product")


def local_factor(alpha, gamma, tau: TauTable, pol: TruncationPolicy):
    """(primes, Theta(p)) for p <= p_max; Theta has one column per prime."""
    p, t = _prime_data(tau, pol.p_max)
    a = np.asarray(alpha, dtype=np.complex128)[..., None]
    g = np.asarray(gamma, dtype=np.complex128)[..., None]
    f1, f2, f3, f4, f5 = _factors(p, t, a, g)
    return p, f1 * f2 * f3 / (f4 * f5)


def b_delta(alpha, gamma, tau: TauTable, pol: TruncationPolicy | None = None, accelerate: bool = False):
    """prod_p Theta(p) over p <= p_max.

    accelerate=True pulls out the slowly converging pieces exactly:
    Theta = (1 - p^{-2-4a})(1 + p^{-2-3a-g}) (1 + O(p^{-2}))
    and restores them with zeta(s1) / (zeta(2+4a) zeta(2 s1)), s1 = 2 + 3a + g.
    """
    pol = pol or TruncationPolicy()
    alpha = np.asarray(alpha, dtype=np.complex128)
    gamma = np.asarray(gamma, dtype=np.complex128)
    alpha, gamma = np.broadcast_arrays(alpha, gamma)
    _check_shifts(alpha, gamma)
    p, theta = local_factor(alpha, gamma, tau, pol)
    logp = np.log(p)
    if accelerate:
        a = alpha[..., None]
        g = gamma[..., None]
        theta = theta / ((1 - np.exp(-(2 + 4 * a) * logp)) * (1 + np.exp(-(2 + 3 * a + g) * logp)))
    logb = np.log(theta).sum(axis=-1)
    out = np.exp(logb)
    if accelerate:
        s1 = 2 + 3 * alpha + gamma
        out = out * zeta(s1) / (zeta(2 + 4 * alpha) * zeta(2 * s1))
    return out if out.ndim else complex(out)


def _even_power_sum(c2, x):
    # sum_{m>=1} (a^2m + abar^2m) x^m
    return (c2 * x - 2 * x * x) / (1 - c2 * x + x * x)


def b_delta_deriv_closed(y, tau: TauTable, pol: TruncationPolicy | None = None):
    """dB/d alpha at alpha = gamma = iy: sum_p log p/(p+1) sum_m (a^2m + abar^2m) p^{-m(1+2iy)}."""
    pol = pol or TruncationPolicy()
    p, t = _prime_data(tau, pol.p_max)
    y = np.asarray(y, dtype=np.float64)
    logp = np.log(p)
    x = np.exp(-np.multiply.outer(1 + 2j * y, logp))
    vals = _even_power_sum(t * t - 2.0, x) @ (logp / (p + 1.0))
    return vals if vals.ndim else complex(vals)


def b_delta_deriv_logform(y, tau: TauTable, pol: TruncationPolicy | None = None):
    """Same derivative as f1'/f1 + f2'/f2 - f4'/f4 - f5'/f5, summed over p, at r = iy.

    f1' at the diagonal is assembled from its three m-series (derivatives of the
    generating functions), f2 and f4 share their value there.
    """
    pol = pol or TruncationPolicy()
    p, t = _prime_data(tau, pol.p_max)
    y = np.asarray(y, dtype=np.float64)
    logp = np.log(p)
    r = 1j * y[..., None] if y.ndim else 1j * y
    x = np.exp(-(1 + 2 * r) * logp)
    c2 = t * t - 2.0
    t2 = t * t - 1.0
    Q = 1 - c2 * x + x * x
    dQ = -c2 + 2 * x
    E = (1 + x) / Q
    dE = (Q - (1 + x) * dQ) / (Q * Q)
    O = t / Q
    dO = -t * dQ / (Q * Q)
    s_even = 2 * x * dE  # sum 2m tau*(p^2m) x^m
    s_odd = t * x * (O + 2 * x * dO)  # tau*(p) sum (2m+1) tau*(p^{2m+1}) x^{m+1}
    s_shift = x * s_even  # sum 2m tau*(p^2m) x^{m+1}
    rho = p / (p + 1.0)
    f1p = -rho * logp * (s_even - s_odd + s_shift)
    f1 = 1 + rho * (E - 1 - t * x * O + x * E)
    f2 = 1 - t2 * x + t2 * x * x - x**3
    f24 = logp * (t2 * x - 2 * t2 * x * x + 3 * x**3) / f2
    f5 = logp * x / (1 - x)
    vals = (f1p / f1 + f24 - f5).sum(axis=-1)
    return vals if np.ndim(vals) else complex(vals)


def b_delta_deriv_oracle(y: float, tau: TauTable, pol: TruncationPolicy | None = None, radius: float = 1e-3, points: int = 16) -> complex:
    """d/d alpha log B(alpha; r) at alpha = r = iy by the Cauchy integral on a small circle."""
    pol = pol or TruncationPolicy()
    r = 1j * y
    phi = 2 * math.pi * np.arange(points) / points
    ring = r + radius * np.exp(1j * phi)
    vals = b_delta(ring, np.full(points, r), tau, pol)
    return complex(np.mean(np.log(vals) * np.exp(-1j * phi)) / radius)


def b_delta_deriv_complex_step(tau: TauTable, pol: TruncationPolicy | None = None, h: float = 1e-20) -> float:
    """Complex-step derivative at y = 0, where B(alpha; 0) is real for real alpha."""
    pol = pol or TruncationPolicy()
    return float(np.imag(np.log(b_delta(1j * h, 0.0, tau, pol))) / h)


def b_delta_deriv_series(tau: TauTable, pol: TruncationPolicy | None, L: float, floor: float = 1e-18):
    """(lambda, coef) with B'(iy; iy) = sum coef e^{-2 pi i lambda nu}, y = pi nu / L."""
    pol = pol or TruncationPolicy()
    p, t = _prime_data(tau, pol.p_max)
    theta = np.arccos(np.clip(t / 2, -1, 1))
    lam, coef = [], []
    lp = np.log(p)
    k = 1
    while True:
        mag = p ** (-float(k))
        keep = mag > floor
        if not keep.any():
            break
        lam.append(k * lp[keep] / L)
        coef.append(lp[keep] / (p[keep] + 1) * 2 * np.cos(2 * k * theta[keep]) * mag[keep])
        k += 1
    return np.concatenate(lam), np.concatenate(coef)


def m_identity(p: int, y: float, tau: TauTable) -> complex:
    """The per-prime combination that cancels in dB/d alpha (exactly zero)."""
    t = float(tau.star[p])
    theta = math.acos(max(-1.0, min(1.0, t / 2)))
    a2 = complex(math.cos(2 * theta), math.sin(2 * theta))
    q = p ** (-(1 + 2j * y))
    A1, A2 = a2 * q, a2.conjugate() * q
    series = A1 / (1 - A1) + A2 / (1 - A2)
    t2 = t * t - 1
    mid = (t2 * q - 2 * t2 * q**2 + 3 * q**3) / (1 - t2 * q + t2 * q**2 - q**3)
    return -series + mid + 1 / (1 - p ** (1 + 2j * y))


# ---------------------------------------------------------------- remainder


@dataclass(frozen=True)
class RemainderResult:
    X: float
    w: float
    pole: float
    shifted: complex

    @property
    def total(self) -> complex:
        return self.pole + self.shifted


def tau_size_for(X: float, pol: TruncationPolicy | None = None, nu_max: float = 200.0) -> int:
    """Smallest tau table covering every prime window and the AFE at (X, pol)."""
    pol = pol or TruncationPolicy()
    L = math.log(X / (2 * math.pi))
    return max(pol.p_max, int(math.ceil(X)), afe_length(2 * math.pi * nu_max / L)) + 1


def remainder_R(X: float, tf: TestFunctionPair, w: float, tau: TauTable, pol: TruncationPolicy | None = None, dset: DiscriminantSet | None = None, direct_dsum: bool = False, dnu: float = 0.02, nu_max: float = 200.0) -> RemainderResult:
    """R(g; X) on the contour Im(nu) = -wL/pi, with the pole at nu = 0 separated.

    On the real line the zeta pole contributes g(0)/2 to the principal value; the
    shifted integral carries the rest. Trapezoid on a uniform nu grid, using
    F(-nu) = conj F(nu).
    """
    if not 0 < w < 0.25:
        raise ValueError("w must lie in (0, 1/4)")
    pol = pol or TruncationPolicy()
    dset = dset or enumerate_discriminants(X)
    L = dset.L
    xs = dset.x_star
    J = int(round(nu_max / dnu))
    nu = dnu * np.arange(J + 1)
    y = math.pi * nu / L
    z = nu - 1j * w * L / math.pi
    g = tf.g(z)
    if direct_dsum:
        ls = dset.log_scaled
        dsum = np.array(
            [np.sum(np.exp(-2j * math.pi * zz * ls / L)) for zz in z]
        )
    else:
        dsum = discriminant_exp_sum_closed(dset, z)
    gam = gamma_ratio(y, w)
    zet = zeta(1 + 2 * w + 2j * y)
    h = 2 * math.pi * dnu / L
    afe = Sym2AFE(tau)
    lsym = afe.on_line(1 - 2 * w, -J * h, h, J + 1)[::-1]
    bd = b_delta(-w - 1j * y, w + 1j * y, tau, pol, accelerate=True)
    F = g * dsum * gam * zet * lsym * bd
    integral = dnu * (F[0].real + 2 * np.sum(F[1:]).real)
    delta = sym2_at_one(tau)
    shifted = -integral / (L * xs * delta)
    return RemainderResult(X=float(X), w=w, pole=0.5 * tf.g0, shifted=complex(shifted))


def b_prime_integral(X: float, tau: TauTable, tf: TestFunctionPair, pol: TruncationPolicy | None = None, mesh: float = 1.0) -> float:
    """(1/L) int g(v) B'(i pi v/L; i pi v/L) dv with B' in its five-factor form."""
    pol = pol or TruncationPolicy()
    L = math.log(X / (2 * math.pi))
    V, nu, wt = nu_grid(tf, mesh)
    vals = np.real(b_delta_deriv_logform(math.pi * nu / L, tau, pol))
    head = math.fsum((wt * np.real(tf.g(nu)) * vals).tolist())
    lam, coef = b_delta_deriv_series(tau, pol, L)
    return 2.0 / L * (head + dirichlet_cos_tail(tf, V, lam, coef))


def rc_one_level_density(X: float, sigma: float, tau: TauTable, pol: TruncationPolicy | None = None, tf: TestFunctionPair | None = None, dset: DiscriminantSet | None = None, w: float = W_DEFAULT, include_remainder: bool = True, mesh: float = 1.0) -> DensityBreakdown:
    pol = pol or TruncationPolicy()
    tf = tf or fejer_pair(sigma)
    dset = dset or enumerate_discriminants(X)
    arch = archimedean_term(dset, tf, mesh)
    _, smz = s_even1_asymptotic(X, tau, tf, pol, mesh=mesh, parts=True)
    bp = b_prime_integral(X, tau, tf, pol, mesh)
    if include_remainder:
        rem = remainder_R(X, tf, w, tau, pol, dset)
        pole, shifted = rem.pole, rem.shifted
    else:
        pole, shifted = 0.5 * tf.g0, 0j
    total = math.fsum([arch, pole, smz, bp, shifted.real])
    return DensityBreakdown(
        side="RC",
        X=float(X),
        sigma=float(sigma),
        archimedean=arch,
        half_g0=pole,
        sym2_minus_zeta=smz,
        even2_main=bp,
        odd_term=0.0,
        remainder=shifted,
        total=total,
    )


@dataclass(frozen=True)
class ComparisonReport:
    X: float
    sigma: float
    nt: DensityBreakdown
    rc: DensityBreakdown
    abs_diff: float
    rel_diff: float
    predicted_rate: float

    def as_record(self) -> dict:
        return {
            "x": self.X,
            "sigma": self.sigma,
            "nt": self.nt.as_record(),
            "rc": self.rc.as_record(),
            "abs_diff": self.abs_diff,
            "rel_diff": self.rel_diff,
            "predicted_rate": self.predicted_rate,
        }


def compare(X: float, sigma: float, tau: TauTable, pol: TruncationPolicy | None = None, w: float = W_DEFAULT, structural_zero: bool = False, threads: int | None = None) -> ComparisonReport:
    """Both sides on identical inputs, evaluated concurrently.

    structural_zero drops the remainder; the odd term is never part of either total.
    """
    pol = pol or TruncationPolicy()
    tf = fejer_pair(sigma)
    dset = enumerate_discriminants(X)
    sides = (
        lambda: nt_one_level_density(X, sigma, tau, pol, tf, dset),
        lambda: rc_one_level_density(X, sigma, tau, pol, tf, dset, w, include_remainder=not structural_zero),
    )
    nt, rc = ordered_map(lambda f: f(), sides, threads)
    diff = abs(nt.total - rc.total)
    return ComparisonReport(
        X=float(X),
        sigma=float(sigma),
        nt=nt,
        rc=rc,
        abs_diff=diff,
        rel_diff=diff / abs(nt.total) if nt.total else math.inf,
        predicted_rate=float(X) ** (-(1 - sigma) / 2),
    )
