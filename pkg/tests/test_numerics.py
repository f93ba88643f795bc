import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from ratioslab.numerics import cos_over_sq_tail, fejer_cos_tail, gl_panels, ordered_map, resolve_threads


def test_gl_panels_integrates():
    x, w = gl_panels(0.0, 10.0, 0.25)
    assert np.sum(w * np.cos(3 * x)) == pytest.approx(math.sin(30) / 3, abs=1e-14)


@pytest.mark.parametrize("c", [0.7, -2.3])
def test_cos_over_sq_tail(c):
    V = 40.0
    ref = float(mp.quadosc(lambda v: mp.cos(c * v) / v**2, [V, mp.inf], omega=abs(c)))
    assert cos_over_sq_tail(c, V) == pytest.approx(ref, abs=1e-14)
    assert cos_over_sq_tail(0.0, V) == pytest.approx(1 / V, abs=1e-15)


def test_fejer_cos_tail():
    sigma, V, lam = 0.5, 120.0, 0.31
    g = lambda v: math.sin(math.pi * sigma * v) ** 2 / (math.pi**2 * sigma * v * v)
    ref, err = quad(g, V, np.inf, weight="cos", wvar=2 * math.pi * lam, limlst=200)
    assert err < 1e-8
    assert fejer_cos_tail(lam, sigma, V) == pytest.approx(ref, abs=1e-8)


def test_ordered_map_preserves_order():
    items = list(range(50))
    assert ordered_map(lambda i: i * i, items, 7) == [i * i for i in items]


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("RATIOSLAB_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(5) == 5
    monkeypatch.delenv("RATIOSLAB_THREADS")
    assert resolve_threads() >= 1
    with pytest.raises(ValueError):
        resolve_threads(0)
