import numpy as np
import pytest
import sympy as sp
from scipy.special import eval_gegenbauer, lpmv

from wulffflow.errors import DomainError
from wulffflow.harmonics import harmonic_polynomial, parse_harmonics, sphere_area
from wulffflow.homogeneous import fibonacci_sphere


def _evaluate(n, l, m, x):
    expr, sym = harmonic_polynomial(n, l, m)
    return sp.lambdify(sym, expr, "numpy")(*x.T) * np.ones(len(x))


def test_sphere_areas():
    assert sphere_area(1) == pytest.approx(2 * np.pi)
    assert sphere_area(2) == pytest.approx(4 * np.pi)
    assert sphere_area(3) == pytest.approx(2 * np.pi ** 2)


@pytest.mark.parametrize("l,m", [(0, 0), (1, 0), (2, 0), (2, 1), (2, -2), (3, 1), (3, -3)])
def test_s2_harmonics_match_associated_legendre(l, m):
    x = fibonacci_sphere(200)
    theta = np.arccos(np.clip(x[:, 0], -1, 1))
    phi = np.arctan2(x[:, 2], x[:, 1])
    am = abs(m)
    from math import factorial
    norm = np.sqrt((2 * l + 1) / (4 * np.pi) * factorial(l - am) / factorial(l + am))
    # scipy includes the Condon-Shortley phase (-1)^m
    leg = (-1) ** am * lpmv(am, l, np.cos(theta))
    if m == 0:
        ref = norm * leg
    else:
        ref = np.sqrt(2) * norm * leg * (np.cos(am * phi) if m > 0 else np.sin(am * phi))
    np.testing.assert_allclose(_evaluate(2, l, m, x), ref, atol=1e-12)


@pytest.mark.parametrize("n,l", [(2, 2), (3, 2), (3, 3), (4, 2)])
def test_zonal_harmonics_are_normalized(n, l):
    # integrate Y^2 over S^n in the polar angle: |S^{n-1}| int Y(t)^2 sin^{n-1}
    t, w = np.polynomial.legendre.leggauss(80)
    theta = 0.5 * np.pi * (t + 1)
    x = np.zeros((theta.size, n + 1))
    x[:, 0], x[:, 1] = np.cos(theta), np.sin(theta)
    y = _evaluate(n, l, 0, x)
    val = sphere_area(n - 1) * 0.5 * np.pi * np.sum(w * y ** 2 * np.sin(theta) ** (n - 1))
    assert val == pytest.approx(1.0, rel=1e-10)
    # shape is the Gegenbauer polynomial
    ref = eval_gegenbauer(l, (n - 1) / 2, np.cos(theta)) if n > 2 else None
    if ref is not None:
        ratio = y / ref
        assert np.ptp(ratio) < 1e-10 * abs(ratio[0])


def test_harmonic_polynomials_are_harmonic():
    for n, l, m in [(2, 3, 2), (3, 4, 0), (2, 2, -1)]:
        expr, sym = harmonic_polynomial(n, l, m)
        lap = sp.lambdify(sym, sum(sp.diff(expr, s, 2) for s in sym), "numpy")
        pts = np.random.default_rng(1).standard_normal((50, n + 1))
        scale = float(np.max(np.abs(sp.lambdify(sym, expr, "numpy")(*pts.T))))
        assert np.max(np.abs(lap(*pts.T))) < 1e-12 * max(scale, 1.0)


def test_invalid_harmonics():
    with pytest.raises(DomainError):
        harmonic_polynomial(2, 1, 2)
    with pytest.raises(DomainError):
        harmonic_polynomial(3, 2, 1)


def test_parse_harmonics():
    assert parse_harmonics("2:0:1, 3:-1:0.5") == {(2, 0): 1.0, (3, -1): 0.5}
    assert parse_harmonics({(1, 0): 2}) == {(1, 0): 2.0}
    assert parse_harmonics(None) == {}
    with pytest.raises(DomainError):
        parse_harmonics("2:0")
