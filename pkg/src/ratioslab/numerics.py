"""Quadrature panels, closed-form Fejer tails and a deterministic parallel map."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import sici

ENV_THREADS = "RATIOSLAB_THREADS"


@lru_cache(maxsize=16)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def gl_panels(a: float, b: float, width: float, order: int = 24):
    """Composite Gauss-Legendre nodes and weights on [a, b] with panels of at most `width`."""
    n = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, n + 1)
    x, w = _legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def cos_over_sq_tail(c, V: float):
    """int_V^inf cos(c v) / v^2 dv for real c (vectorized)."""
    c = np.abs(np.asarray(c, dtype=np.float64))
    si, _ = sici(c * V)
    return np.cos(c * V) / V - c * (0.5 * math.pi - si)


def fejer_cos_tail(lam, sigma: float, V: float):
    """int_V^inf g(v) cos(2 pi lam v) dv for the Fejer g(v) = (1 - cos 2 pi sigma v) / (2 pi^2 sigma v^2)."""
    a = 2 * math.pi * np.asarray(lam, dtype=np.float64)
    b = 2 * math.pi * sigma
    core = cos_over_sq_tail(a, V) - 0.5 * (cos_over_sq_tail(a + b, V) + cos_over_sq_tail(a - b, V))
    return core / (2 * math.pi**2 * sigma)


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(ENV_THREADS, "").strip()
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise ValueError("thread count must be positive")
    return threads


def ordered_map(fn: Callable, items: Sequence, threads: int | None = None) -> list:
    """map preserving input order; the work split never depends on the thread count."""
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def fsum_real(values: Iterable[float]) -> float:
    return math.fsum(float(v) for v in values)
