"""Ramanujan tau coefficients, unitary normalization and Satake angles."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

# Four primes just below 2**31. Their product (~2**124) bounds the CRT range.
_MODULI = (2147483647, 2147483629, 2147483587, 2147483579)
_N_MAX_LIMIT = 10**6


def primes_up_to(n: int) -> np.ndarray:
    """Primes <= n (sieve of Eratosthenes), as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _eta_cubed_terms(deg: int) -> tuple[np.ndarray, np.ndarray]:
    # Jacobi: prod(1-q^n)^3 = sum_k (-1)^k (2k+1) q^{k(k+1)/2}
    exps, coefs = [], []
    k = 0
    while k * (k + 1) // 2 <= deg:
        exps.append(k * (k + 1) // 2)
        coefs.append((-1) ** k * (2 * k + 1))
        k += 1
    return np.array(exps, dtype=np.int64), np.array(coefs, dtype=np.int64)


def _eta24_mod(deg: int, m: int) -> np.ndarray:
    exps, coefs = _eta_cubed_terms(deg)
    f = np.zeros(deg + 1, dtype=np.int64)
    f[exps] = coefs % m
    for _ in range(7):
        acc = np.zeros(deg + 1, dtype=np.int64)
        for e, c in zip(exps, coefs):
            # |c| < 2**12 and f < 2**31, so the running sum stays inside int64
            acc[e:] += c * f[: deg + 1 - e]
        f = acc % m
    return f


def _crt_combine(residues: Sequence[np.ndarray]) -> list[int]:
    # Garner's mixed-radix form, vectorized except for the final big-int step
    ms = _MODULI
    digits = [residues[0] % ms[0]]
    for i in range(1, len(ms)):
        x = residues[i] % ms[i]
        for j in range(i):
            inv = pow(ms[j], -1, ms[i])
            x = ((x - digits[j]) % ms[i]) * inv % ms[i]
        digits.append(x)
    big_m = 1
    for m in ms:
        big_m *= m
    half = big_m // 2
    out = []
    cols = [d.tolist() for d in digits]
    for vals in zip(*cols):
        v = 0
        for j in range(len(ms) - 1, -1, -1):
            v = v * ms[j] + vals[j]
        out.append(v - big_m if v > half else v)
    return out


@dataclass(frozen=True, eq=False)
class TauTable:
    """Exact tau(1..n_max); coeffs[n-1] = tau(n). Hashed by identity."""

    n_max: int
    coeffs: tuple[int, ...] = field(repr=False)

    def tau(self, n: int) -> int:
        if not 1 <= n <= self.n_max:
            raise ValueError(f"n={n} outside table range 1..{self.n_max}")
        return self.coeffs[n - 1]

    @cached_property
    def star(self) -> np.ndarray:
        """tau*(n) for n = 0..n_max (index 0 unused, set to 0)."""
        n = np.arange(1, self.n_max + 1, dtype=np.float64)
        # tau(n) < 1e36 for n <= 1e6, so float conversion is safe
        t = np.array([float(c) for c in self.coeffs])
        return np.concatenate(([0.0], t / n**5.5))

    @cached_property
    def primes(self) -> np.ndarray:
        return primes_up_to(self.n_max)

    @cached_property
    def prime_thetas(self) -> np.ndarray:
        """Satake angles theta_p aligned with self.primes."""
        return np.arccos(np.clip(self.star[self.primes] / 2.0, -1.0, 1.0))


def tau_series(n_max: int) -> TauTable:
    """Exact coefficients of q * prod(1 - q^n)^24 up to q^n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max > _N_MAX_LIMIT:
        raise OverflowError(
            f"n_max={n_max} exceeds the CRT range of the fixed-width moduli; "
            f"arbitrary-precision expansion needed beyond {_N_MAX_LIMIT}"
        )
    deg = n_max - 1
    residues = [_eta24_mod(deg, m) for m in _MODULI]
    return TauTable(n_max=n_max, coeffs=tuple(_crt_combine(residues)))


def tau_star(table: TauTable, n: int) -> float:
    if not 1 <= n <= table.n_max:
        raise ValueError(f"n={n} outside table range 1..{table.n_max}")
    return float(table.star[n])


@dataclass(frozen=True)
class SatakeAngle:
    p: int
    theta: float

    @property
    def alpha(self) -> complex:
        return complex(np.cos(self.theta), np.sin(self.theta))


def satake_angle(table: TauTable, p: int) -> SatakeAngle:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    t = tau_star(table, p)
    return SatakeAngle(p=p, theta=float(np.arccos(min(1.0, max(-1.0, t / 2.0)))))


def power_sum(angle: SatakeAngle, k: int) -> float:
    """alpha_p^k + conj(alpha_p)^k = 2 cos(k theta_p)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return 2.0 * np.cos(k * angle.theta)


def hecke_star(theta: np.ndarray | float, m: int) -> np.ndarray | float:
    """tau*(p^m) = sin((m+1)theta)/sin(theta), with the limit +-(m+1) at theta in {0, pi}."""
    theta = np.asarray(theta, dtype=np.float64)
    s = np.sin(theta)
    safe = np.abs(s) > 1e-12
    out = np.where(
        safe,
        np.sin((m + 1) * theta) / np.where(safe, s, 1.0),
        np.where(np.cos(theta) > 0, 1.0, (-1.0) ** m) * (m + 1),
    )
    return out if out.ndim else float(out)
