import numpy as np
import pytest

from wulffflow import build_sphere_grid
from wulffflow.errors import ConfigError, DomainError

from conftest import refinement_order


def test_full_weights_sum_to_sphere_area():
    g = build_sphere_grid("full", 64, 128)
    assert g.weights.sum() == pytest.approx(4 * np.pi, rel=1e-8)
    assert g.shape == (64, 128)


def test_axisymmetric_s3_weights():
    g = build_sphere_grid("axisymmetric", 256, n=3)
    assert g.weights.sum() == pytest.approx(2 * np.pi ** 2, rel=1e-8)
    assert g.shape == (256, 1)


def test_quadrature_exact_for_polynomials():
    g = build_sphere_grid("full", 32)
    x = g.x
    assert g.integrate(x[..., 0] ** 2) == pytest.approx(4 * np.pi / 3, rel=1e-12)
    assert g.integrate(x[..., 1] ** 2 * x[..., 2] ** 2) == pytest.approx(4 * np.pi / 15, rel=1e-12)
    assert abs(g.integrate(x[..., 2])) < 1e-13


def _gradient_error(n_theta):
    g = build_sphere_grid("full", n_theta)
    f = g.x[..., 2]
    grad = g.gradient(f)
    exact = np.stack([g.e_theta[..., 2], g.e_phi[..., 2]], axis=-1)
    return np.abs(grad - exact).max()


def test_gradient_converges_at_least_second_order():
    errs = [_gradient_error(n) for n in (16, 32, 64)]
    assert errs[-1] < 1e-4
    assert np.all(refinement_order(errs) >= 2.0)


def test_laplacian_of_spherical_harmonic():
    g = build_sphere_grid("full", 64)
    f = g.x[..., 1] * g.x[..., 2]
    np.testing.assert_allclose(g.laplacian(f), -6 * f, atol=1e-4)


def test_axisymmetric_laplacian_s3():
    g = build_sphere_grid("axisymmetric", 128, n=3)
    f = g.x[..., 0]
    np.testing.assert_allclose(g.laplacian(f), -3 * f, atol=1e-5)


def test_hessian_of_linear_function():
    g = build_sphere_grid("full", 64)
    v = np.array([0.3, -0.5, 0.8])
    f = g.x @ v
    h = g.hessian(f)
    np.testing.assert_allclose(h, -f[..., None, None] * np.eye(2), atol=1e-5)


def test_refined_and_validation():
    g = build_sphere_grid("full", 16)
    assert g.refined().shape == (32, 64)
    with pytest.raises(ConfigError):
        build_sphere_grid("full", 8)
    with pytest.raises(ConfigError):
        build_sphere_grid("icosahedral", 32)
    with pytest.raises((ConfigError, DomainError)):
        g.integrate(np.ones((3, 3)))


def test_order_two_stencils_are_second_order():
    errs = []
    for n in (16, 32, 64):
        g = build_sphere_grid("full", n, order=2)
        f = g.x[..., 0] ** 2
        lap = g.laplacian(f)
        errs.append(np.abs(lap - (2 - 6 * f)).max())
    assert errs[-1] < errs[0]


def test_polar_filter_keeps_resolved_modes():
    g = build_sphere_grid("full", 32)
    f = np.cos(g.theta)[:, None] + np.sin(g.theta)[:, None] * np.cos(g.phi)[None, :]
    np.testing.assert_allclose(g.polar_filter(f), f, atol=1e-13)
    high = np.broadcast_to(np.cos(20 * g.phi), g.shape)
    out = g.polar_filter(high)
    assert np.abs(out[0]).max() < 1e-13
    np.testing.assert_allclose(out[16], high[16], atol=1e-13)
    np.testing.assert_allclose(g.polar_filter(out), out, atol=1e-13)


def test_polar_filter_relaxes_spectral_radius():
    g = build_sphere_grid("full", 64)
    assert g.filtered_spectral_radius < g.spectral_radius / 100
    assert g.polar_cutoffs[0] >= 1 and g.polar_cutoffs.max() == g.n_phi // 2
    axi = build_sphere_grid("axisymmetric", 64)
    assert axi.filtered_spectral_radius == axi.spectral_radius
