"""Eigenangle samplers for the classical compact groups and Kronecker lowest-angle statistics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .numerics import ordered_map

log = logging.getLogger(__name__)

KINDS = ("unitary", "so_even", "so_odd", "usp")
TWO_PI = 2 * math.pi
BLOCK = 1000  # draws per independent RNG stream
AR_MAX_N = 8
SAFETY = 1.5


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    N: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.N < 1:
            raise ValueError("N must be >= 1")

    @classmethod
    def parse(cls, text: str) -> "EnsembleSpec":
        kind, _, n = text.partition(":")
        if not n:
            raise ValueError(f"expected KIND:N, got {text!r}")
        return cls(kind.strip(), int(n))

    def __str__(self):
        return f"{self.kind}:{self.N}"


@dataclass(frozen=True)
class AngleSampleSet:
    spec: object
    samples: np.ndarray = field(repr=False)
    seed: int
    count: int

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.size != self.count:
            raise ValueError("count must equal the number of samples")
        if s.size and (s.min() < 0 or s.max() >= TWO_PI):
            raise ValueError("samples must lie in [0, 2 pi)")


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    total: int


# ---------------------------------------------------------------- densities


def log_normalizer(kind: str, N: int) -> float:
    """log of the constant making the unordered density integrate to 1 on [0, pi]^N."""
    if kind == "so_even":
        return (N - 1) ** 2 * math.log(2) - N * math.log(math.pi) - math.lgamma(N + 1)
    if kind in ("so_odd", "usp"):
        return N * N * math.log(2) - N * math.log(math.pi) - math.lgamma(N + 1)
    raise ValueError("unitary angles have no Weyl density here")


def _log_weyl_unnormalized(kind: str, theta: np.ndarray) -> np.ndarray:
    c = np.cos(theta)
    N = theta.shape[-1]
    out = np.zeros(theta.shape[:-1])
    for j in range(N):
        for k in range(j + 1, N):
            out = out + 2 * np.log(np.abs(c[..., k] - c[..., j]))
    if kind == "so_odd":
        out = out + 2 * np.log(np.abs(np.sin(theta / 2))).sum(axis=-1)
    elif kind == "usp":
        out = out + 2 * np.log(np.abs(np.sin(theta))).sum(axis=-1)
    return out


def weyl_density(spec: EnsembleSpec, angles) -> float | np.ndarray:
    """Joint density of the N free angles on [0, pi]^N (unordered)."""
    if spec.kind == "unitary":
        raise ValueError("weyl_density is defined for so_even, so_odd and usp")
    theta = np.asarray(angles, dtype=np.float64)
    if theta.shape[-1] != spec.N:
        raise ValueError(f"expected {spec.N} angles")
    if np.any(theta < 0) or np.any(theta > math.pi):
        raise ValueError("angles must lie in [0, pi]")
    with np.errstate(divide="ignore"):
        val = np.exp(log_normalizer(spec.kind, spec.N) + _log_weyl_unnormalized(spec.kind, theta))
    return val if val.ndim else float(val)


@lru_cache(maxsize=64)
def sup_estimate(spec: EnsembleSpec, margin: float = SAFETY) -> float:
    """Grid/random search plus local refinement of the density maximum, times the margin."""
    if spec.kind == "unitary":
        raise ValueError("no envelope for unitary angles")
    N = spec.N
    if N == 1:
        grid = np.linspace(0, math.pi, 20001)[:, None]
        return float(weyl_density(spec, grid).max()) * margin
    rng = np.random.default_rng(12345)
    cand = np.sort(rng.uniform(0, math.pi, size=(20000, N)), axis=1)
    vals = weyl_density(spec, cand)
    best = cand[np.argsort(vals)[-8:]]

    def neg_log(x):
        x = np.clip(x, 1e-9, math.pi - 1e-9)
        v = _log_weyl_unnormalized(spec.kind, x[None, :])[0]
        return -v if np.isfinite(v) else 1e300

    top = float(vals.max())
    for x0 in best:
        res = minimize(neg_log, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
        x = np.clip(res.x, 0, math.pi)
        top = max(top, float(weyl_density(spec, x)))
    return top * margin


# ---------------------------------------------------------------- samplers


def _accept_reject(spec: EnsembleSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    N = spec.N
    env = sup_estimate(spec)
    out = []
    have = 0
    proposals = 0
    batch = 4096
    while have < count:
        x = rng.uniform(0, math.pi, size=(batch, N))
        u = rng.uniform(0, env, size=batch)
        f = weyl_density(spec, x)
        proposals += batch
        if np.any(f > env):
            log.warning("density exceeded envelope for %s; doubling the margin", spec)
            env *= 2
            out, have = [], 0
            continue
        acc = x[u <= f]
        out.append(acc)
        have += acc.shape[0]
        if proposals >= 10**7 and have / proposals < 1e-6:
            raise RuntimeError(f"acceptance rate {have / proposals:.2e} for {spec}; envelope pathology")
    return np.sort(np.concatenate(out)[:count], axis=1)


def _basis(kind: str, N: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal functions on [0, pi] whose projection kernel reproduces the Weyl density."""
    j = np.arange(1, N + 1)
    xe = x[..., None]
    if kind == "usp":
        return math.sqrt(2 / math.pi) * np.sin(j * xe)
    if kind == "so_odd":
        return math.sqrt(2 / math.pi) * np.sin((j - 0.5) * xe)
    if kind == "so_even":
        out = math.sqrt(2 / math.pi) * np.cos((j - 1) * xe)
        out[..., 0] = 1 / math.sqrt(math.pi)
        return out
    raise ValueError(kind)


def _projection_dpp(spec: EnsembleSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """Sequential sampler for the determinantal (projection-kernel) form of the same density.

    Each step draws from ||P v(x)||^2 / (N - i) by rejection against the bound
    ||v(x)||^2 <= 2N/pi, where P projects away from the points already placed.
    """
    N = spec.N
    bound = 2 * N / math.pi
    pts = np.zeros((count, N))
    E = np.zeros((count, 0, N))
    for i in range(N):
        chosen = np.full(count, np.nan)
        todo = np.arange(count)
        batch = max(8, 2 * N // max(1, N - i))
        while todo.size:
            x = rng.uniform(0, math.pi, size=(todo.size, batch))
            u = rng.uniform(0, bound, size=(todo.size, batch))
            v = _basis(spec.kind, N, x)
            if i:
                coef = np.einsum("tbn,tin->tbi", v, E[todo])
                resid = v - np.einsum("tbi,tin->tbn", coef, E[todo])
            else:
                resid = v
            w = np.einsum("tbn,tbn->tb", resid, resid)
            ok = u <= w
            hit = ok.any(axis=1)
            first = ok.argmax(axis=1)
            rows = np.flatnonzero(hit)
            chosen[todo[rows]] = x[rows, first[rows]]
            todo = todo[~hit]
        v = _basis(spec.kind, N, chosen)
        if i:
            v = v - np.einsum("ti,tin->tn", np.einsum("tn,tin->ti", v, E), E)
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
        E = np.concatenate([E, v[:, None, :]], axis=1)
        pts[:, i] = chosen
    return np.sort(pts, axis=1)


def sample_block(spec: EnsembleSpec, rng: np.random.Generator, count: int, method: str = "auto") -> np.ndarray:
    """count draws of the N free angles, sorted ascending in each row."""
    if spec.kind == "unitary":
        return np.sort(rng.uniform(0, TWO_PI, size=(count, spec.N)), axis=1)
    if method == "auto":
        method = "accept_reject" if spec.N <= 3 else "dpp"
    if method == "accept_reject":
        if spec.N > AR_MAX_N:
            raise ValueError(f"accept-reject is limited to N <= {AR_MAX_N}")
        return _accept_reject(spec, rng, count)
    if method == "dpp":
        return _projection_dpp(spec, rng, count)
    raise ValueError(f"unknown method {method!r}")


def sample_eigenangles(spec: EnsembleSpec, rng: np.random.Generator, method: str = "auto") -> np.ndarray:
    return sample_block(spec, rng, 1, method)[0]


def full_spectrum(spec: EnsembleSpec, draws: np.ndarray) -> np.ndarray:
    """Eigenangles on the unit circle in [0, 2 pi) for each row of free angles."""
    if spec.kind == "unitary":
        return draws
    neg = np.mod(-draws, TWO_PI)
    parts = [draws, np.where(neg >= TWO_PI, np.nextafter(TWO_PI, 0), neg)]
    if spec.kind == "so_odd":
        parts.append(np.zeros((draws.shape[0], 1)))
    return np.concatenate(parts, axis=1)


def lowest_angle(spec: EnsembleSpec, draws: np.ndarray, exclude_zero: bool = False) -> np.ndarray:
    spec_angles = full_spectrum(spec, draws)
    if exclude_zero:
        spec_angles = np.where(spec_angles == 0, np.inf, spec_angles)
    return spec_angles.min(axis=1)


def kronecker_lowest(spec_a: EnsembleSpec, draws_a: np.ndarray, spec_b: EnsembleSpec, draws_b: np.ndarray, exclude_zero: bool = False) -> np.ndarray:
    a = full_spectrum(spec_a, draws_a)
    b = full_spectrum(spec_b, draws_b)
    sums = np.mod(a[:, :, None] + b[:, None, :], TWO_PI).reshape(a.shape[0], -1)
    sums = np.where(sums >= TWO_PI, np.nextafter(TWO_PI, 0), sums)
    if exclude_zero:
        sums = np.where(sums == 0, np.inf, sums)
    return sums.min(axis=1)


def kronecker_lowest_angle(spec_a: EnsembleSpec, spec_b: EnsembleSpec, rng: np.random.Generator, exclude_zero: bool = False) -> float:
    da = sample_block(spec_a, rng, 1)
    db = sample_block(spec_b, rng, 1)
    return float(kronecker_lowest(spec_a, da, spec_b, db, exclude_zero)[0])


# ---------------------------------------------------------------- seeded runs


def _block_rngs(seed: int, count: int, stream: int = 0):
    n_blocks = -(-count // BLOCK)
    root = np.random.SeedSequence([seed, stream])
    return [
        (np.random.default_rng(child), min(BLOCK, count - b * BLOCK))
        for b, child in enumerate(root.spawn(n_blocks))
    ]


def sample_lowest(spec, count: int, seed: int = 0, threads: int | None = None, exclude_zero: bool = False, method: str = "auto", stream: int = 0) -> AngleSampleSet:
    """Lowest eigenangle of count independent draws; spec is one EnsembleSpec or a pair.

    Distinct `stream` values give independent sample sets under one seed.
    """
    if count < 1:
        raise ValueError("count must be positive")

    def work(item):
        rng, n = item
        if isinstance(spec, tuple):
            a, b = spec
            da = sample_block(a, rng, n, method)
            db = sample_block(b, rng, n, method)
            return kronecker_lowest(a, da, b, db, exclude_zero)
        return lowest_angle(spec, sample_block(spec, rng, n, method), exclude_zero)

    parts = ordered_map(work, _block_rngs(seed, count, stream), threads)
    return AngleSampleSet(spec=spec, samples=np.concatenate(parts), seed=seed, count=count)


def sample_angles(spec: EnsembleSpec, count: int, seed: int = 0, threads: int | None = None, method: str = "auto", stream: int = 0) -> np.ndarray:
    """(count, N) array of free angles, block-seeded like sample_lowest."""
    parts = ordered_map(lambda it: sample_block(spec, it[0], it[1], method), _block_rngs(seed, count, stream), threads)
    return np.concatenate(parts)


# ---------------------------------------------------------------- comparison


def _values(x) -> np.ndarray:
    v = np.asarray(x.samples if isinstance(x, AngleSampleSet) else x, dtype=np.float64)
    if v.size == 0:
        raise ValueError("empty sample set")
    return v


def histogram(samples, bin_count: int, upper: float | None = None) -> Histogram:
    v = _values(samples)
    hi = float(v.max()) if upper is None else upper
    if hi <= 0:
        hi = 1.0
    edges = np.linspace(0.0, hi, bin_count + 1)
    counts, _ = np.histogram(v, bins=edges)
    return Histogram(edges=edges, counts=counts.astype(np.int64), total=int(counts.sum()))


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|."""
    x = np.sort(_values(a))
    y = np.sort(_values(b))
    grid = np.concatenate([x, y])
    fa = np.searchsorted(x, grid, side="right") / x.size
    fb = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(fa - fb)))


def ks_against_cdf(samples, cdf) -> float:
    x = np.sort(_values(samples))
    n = x.size
    f = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def n1_cdf(kind: str):
    """Analytic CDF of the single free angle when N = 1."""
    return {
        "unitary": lambda t: t / TWO_PI,
        "so_even": lambda t: t / math.pi,
        "so_odd": lambda t: (t - np.sin(t)) / math.pi,
        "usp": lambda t: (t - np.sin(t) * np.cos(t)) / math.pi,
    }[kind]
