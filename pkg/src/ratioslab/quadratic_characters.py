"""Even fundamental discriminants, Kronecker characters and the d-sums over them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


def _squarefree_mask(n: int) -> np.ndarray:
    mask = np.ones(n + 1, dtype=bool)
    mask[0] = False
    for f in range(2, math.isqrt(n) + 1):
        mask[f * f :: f * f] = False
    return mask


def _is_squarefree(n: int) -> bool:
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


def is_even_fundamental(d: int) -> bool:
    """Positive fundamental discriminant other than 1."""
    if d <= 1:
        return False
    if d % 4 == 1:
        return _is_squarefree(d)
    if d % 4 == 0:
        return (d // 4) % 4 in (2, 3) and _is_squarefree(d // 4)
    return False


@dataclass(frozen=True)
class DiscriminantSet:
    X: float
    members: np.ndarray = field(repr=False)

    @property
    def x_star(self) -> int:
        return int(self.members.size)

    @property
    def L(self) -> float:
        return math.log(self.X / (2 * math.pi))

    @cached_property
    def log_scaled(self) -> np.ndarray:
        """log(d / 2 pi) for each member."""
        return np.log(self.members / (2 * math.pi))


def enumerate_discriminants(X: float) -> DiscriminantSet:
    n = int(math.floor(X))
    if n < 5:
        return DiscriminantSet(X=float(X), members=np.zeros(0, dtype=np.int64))
    sf = _squarefree_mask(n)
    d = np.arange(n + 1)
    odd_kind = (d % 4 == 1) & sf
    quarter = d // 4
    even_kind = (d % 4 == 0) & np.isin(quarter % 4, (2, 3)) & sf[quarter]
    keep = (odd_kind | even_kind) & (d > 1)
    return DiscriminantSet(X=float(X), members=np.flatnonzero(keep).astype(np.int64))


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for integers a, n (binary Jacobi algorithm)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    v = (n & -n).bit_length() - 1
    n >>= v
    if v % 2 == 1 and a % 8 in (3, 5):
        sign = -sign
    a %= n
    while a:
        v = (a & -a).bit_length() - 1
        a >>= v
        if v % 2 == 1 and n % 8 in (3, 5):
            sign = -sign
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a, n = n % a, a
    return sign if n == 1 else 0


def kronecker_chi(d: int, n: int) -> int:
    """chi_d(n) = (d/n) for an even fundamental discriminant d."""
    if not is_even_fundamental(d):
        raise ValueError(f"{d} is not an even fundamental discriminant")
    if n < 1:
        raise ValueError("n must be positive")
    return kronecker(d, n)


def chi_at_prime(members: np.ndarray, p: int) -> np.ndarray:
    """Vector of chi_d(p) over members d, for a prime p."""
    if p == 2:
        table = np.array([0, 1, 0, -1, 0, -1, 0, 1], dtype=np.int64)
        return table[members % 8]
    # Euler's criterion through a residue table mod p
    table = np.full(p, -1, dtype=np.int64)
    table[0] = 0
    r = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
    table[(r * r) % p] = 1
    return table[members % p]


def count_divisible(dset: DiscriminantSet, p: int) -> int:
    return int(np.count_nonzero(dset.members % p == 0))


def discriminant_exp_sum(dset: DiscriminantSet, z: complex) -> complex:
    """Direct sum over d of exp(-2 pi i z log(d/2pi) / L)."""
    a = -2j * math.pi * complex(z) / dset.L
    return complex(np.exp(a * dset.log_scaled).sum())


def discriminant_exp_sum_closed(dset: DiscriminantSet, z):
    """Main term X* e^{-2 pi i z} / (1 - 2 pi i z / L); vectorized in z."""
    z = np.asarray(z, dtype=np.complex128)
    out = dset.x_star * np.exp(-2j * math.pi * z) / (1 - 2j * math.pi * z / dset.L)
    return out if out.ndim else complex(out)
