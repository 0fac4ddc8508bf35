import numpy as np
import pytest
import sympy as sp

from wulffflow.homogeneous import (FiniteDifferenceFunction, QuadraticNorm, SymbolicFunction,
                                   dual_norm, fibonacci_sphere)

from conftest import random_unit


def test_fibonacci_sphere_is_unit_and_spread():
    x = fibonacci_sphere(500)
    np.testing.assert_allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-14)
    assert abs(x.mean(axis=0)).max() < 1e-2
    y = fibonacci_sphere(300, dim=4, seed=3)
    assert y.shape == (300, 4)
    np.testing.assert_allclose(np.linalg.norm(y, axis=1), 1.0, atol=1e-14)


def test_quadratic_norm_matches_symbolic(rng):
    mat = np.array([[4.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 2.0]])
    shift = np.array([0.1, -0.2, 0.05])
    q = QuadraticNorm(mat, shift)
    xs = sp.symbols("x0:3", real=True)
    v = sp.Matrix(xs)
    expr = sp.sqrt((v.T * sp.Matrix(mat) * v)[0]) + sum(s * c for s, c in zip(shift, xs))
    s = SymbolicFunction(expr, xs)
    x = random_unit(rng, 20)
    for name in ("value", "grad", "hess", "third"):
        np.testing.assert_allclose(getattr(q, name)(x), getattr(s, name)(x), atol=1e-12)


def test_homogeneity(rng):
    q = QuadraticNorm(np.diag([4.0, 1.0, 1.0]))
    x = random_unit(rng, 10)
    for lam in (0.3, 2.5):
        np.testing.assert_allclose(q.value(lam * x), lam * q.value(x), rtol=1e-14)
        np.testing.assert_allclose(q.grad(lam * x), q.grad(x), rtol=1e-13)
        np.testing.assert_allclose(q.hess(lam * x), q.hess(x) / lam, rtol=1e-12)


def test_finite_difference_derivatives_agree(rng):
    xs = sp.symbols("x0:3", real=True)
    r = sp.sqrt(sum(v ** 2 for v in xs))
    expr = r + 0.1 * (3 * xs[0] ** 2 - r ** 2) / r
    exact = SymbolicFunction(expr, xs)
    fd = FiniteDifferenceFunction(exact)
    x = random_unit(rng, 5)
    np.testing.assert_allclose(fd.grad(x), exact.grad(x), atol=1e-9)
    np.testing.assert_allclose(fd.hess(x), exact.hess(x), atol=1e-7)
    np.testing.assert_allclose(fd.third(x), exact.third(x), atol=1e-5)


def test_dual_norm_ellipsoid_closed_form(rng):
    axes = np.array([2.0, 1.0, 0.5])
    q = QuadraticNorm(np.diag(axes ** 2))
    z = rng.standard_normal((10, 3))
    expect = np.sqrt(np.sum((z / axes) ** 2, axis=1))
    np.testing.assert_allclose(q.dual(z), expect, rtol=1e-13)
    # the generic Newton solver reproduces it
    np.testing.assert_allclose(dual_norm(q, z), expect, rtol=1e-10)


def test_dual_norm_brute_force(rng):
    xs = sp.symbols("x0:3", real=True)
    r = sp.sqrt(sum(v ** 2 for v in xs))
    expr = r + 0.08 * (3 * xs[0] ** 2 - r ** 2) / r + 0.05 * xs[1] * xs[2] / r
    fn = SymbolicFunction(expr, xs)
    u = fibonacci_sphere(1_000_000)
    fu = fn.value(u)
    z = rng.standard_normal((4, 3))
    brute = np.max((z @ u.T) / fu, axis=1)
    np.testing.assert_allclose(dual_norm(fn, z), brute, rtol=1e-4)
    assert np.all(dual_norm(fn, z) >= brute - 1e-12)


def test_dual_norm_rejects_zero_vector():
    from wulffflow import Anisotropy
    from wulffflow.errors import DomainError

    with pytest.raises(DomainError):
        Anisotropy.round().dual_norm(np.zeros(3))
