from itertools import combinations
from math import comb

import numpy as np
import pytest

from wulffflow import (Anisotropy, build_sphere_grid, build_wulff_chart, codazzi_norm,
                       elementary_all, graph_geometry, phi_dual, tau_matrix, umbilicity_defect)
from wulffflow.bodies import ellipsoid, harmonic_support, wulff
from wulffflow.curvature import (elementary_Ek, newton_maclaurin_gap, psi, psi_gradient,
                                 umbilicity_from_kappa)
from wulffflow.errors import DomainError

from conftest import refinement_order


def test_elementary_anchors():
    np.testing.assert_allclose(elementary_all([1.0, 2.0, 3.0]), [1, 2, 11 / 3, 6])
    np.testing.assert_allclose(elementary_all(np.ones(4)), np.ones(5))
    assert elementary_Ek([1.0, 2.0, 3.0], 2) == pytest.approx(11 / 3)


def test_elementary_brute_force(rng):
    kappa = rng.uniform(0.1, 3.0, size=6)
    e = elementary_all(kappa)
    for k in range(7):
        brute = sum(np.prod(c) for c in combinations(kappa, k)) / comb(6, k) if k else 1.0
        assert e[k] == pytest.approx(brute, rel=1e-12)


def test_phi_dual_anchors():
    assert phi_dual(np.ones(3), 2) == pytest.approx(1.0)
    assert phi_dual(np.array([1.0, 4.0]), 2) == pytest.approx(2.0)
    assert phi_dual(np.array([1.0, 2.0, 3.0]), 2) == pytest.approx(np.sqrt(3.0))
    with pytest.raises(DomainError):
        phi_dual(np.array([1.0, -1.0]), 2)


def test_phi_is_dual_of_psi(rng):
    tau = rng.uniform(0.2, 4.0, size=(50, 3))
    for k in (2, 3):
        np.testing.assert_allclose(phi_dual(tau, k), 1.0 / psi(1.0 / tau, k), rtol=1e-12)


def test_psi_gradient_matches_differences(rng):
    kappa = rng.uniform(0.3, 2.0, size=(4, 3))
    h = 1e-6
    for k in (1, 2, 3):
        grad = psi_gradient(kappa, k)
        for i in range(3):
            dk = np.zeros(3)
            dk[i] = h
            fd = (psi(kappa + dk, k) - psi(kappa - dk, k)) / (2 * h)
            np.testing.assert_allclose(grad[:, i], fd, rtol=1e-6)


def test_umbilicity_identity():
    assert umbilicity_from_kappa(np.array([1.0, 3.0])) == pytest.approx(4.0)
    k = np.array([0.5, 1.0, 2.5])
    pairs = sum((a - b) ** 2 for a, b in combinations(k, 2))
    assert umbilicity_from_kappa(k) == pytest.approx(pairs)


def test_newton_maclaurin_chain(rng):
    kappa = rng.uniform(0.01, 5.0, size=(200, 4))
    assert newton_maclaurin_gap(kappa).max() <= 1e-12


def test_round_sphere_geometry():
    g = build_sphere_grid("full", 32)
    rho0 = 1.7
    geom = graph_geometry(Anisotropy.round(), g, np.full(g.shape, np.log(rho0)))
    np.testing.assert_allclose(geom.kappa, 1 / rho0, rtol=1e-12)
    np.testing.assert_allclose(geom.sigma_f, rho0, rtol=1e-12)
    e = geom.elementary()
    for k in range(3):
        np.testing.assert_allclose(e[..., k], rho0 ** (-k), rtol=1e-11)


@pytest.mark.parametrize("name", ["ellipsoid_f", "harmonic_f"])
def test_scaled_wulff_shape_has_equal_curvatures(name, request):
    f = request.getfixturevalue(name)
    errs = []
    for n in (16, 32, 64):
        g = build_sphere_grid("full", n)
        geom = graph_geometry(f, g, np.log(wulff(f, 1.6).radial(g.x)))
        errs.append(np.abs(geom.kappa - 1 / 1.6).max())
        if n == 64:
            assert umbilicity_defect(geom) < 1e-5
    assert errs[-1] < 1e-3
    assert refinement_order(errs)[-1] >= 2.0


def test_gauss_curvature_identity(ellipsoid_f):
    # E_n(kappa) = det A_F(nu) * E_n(isotropic curvatures)
    g = build_sphere_grid("full", 32)
    body = ellipsoid([1.3, 0.9, 0.7], center=[0.1, 0.0, -0.05])
    geom = graph_geometry(ellipsoid_f, g, np.log(body.radial(g.x)))
    lhs = np.prod(geom.kappa, axis=-1)
    rhs = np.linalg.det(geom.a_tan) * np.prod(geom.isotropic_curvatures, axis=-1)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-6)
    assert geom.gauge_asymmetry() < 1e-12


def test_tau_of_constant_support(harmonic_f):
    c = build_wulff_chart(harmonic_f, build_sphere_grid("full", 16))
    t = tau_matrix(c, np.full(c.grid.shape, 0.8))
    np.testing.assert_allclose(t.tau, 0.8 * c.metric, atol=1e-12)
    np.testing.assert_allclose(t.radii, 0.8, atol=1e-12)


def test_tau_translated_round_sphere():
    g = build_sphere_grid("full", 64)
    c = build_wulff_chart(Anisotropy.round(), g)
    v = np.array([0.2, -0.3, 0.1])
    t = tau_matrix(c, 1 + g.x @ v)
    np.testing.assert_allclose(t.tau, c.metric, atol=1e-5)


def test_tau_matches_curvature_radii(ellipsoid_f):
    # extreme curvature radii do not depend on the parametrization
    g = build_sphere_grid("full", 64)
    body = harmonic_support(2, 1.0, {(2, 0): 1.0, (3, 1): 0.5}, 0.1)
    geom = graph_geometry(ellipsoid_f, g, np.log(body.radial(g.x)))
    c = build_wulff_chart(ellipsoid_f, g)
    t = tau_matrix(c, body.anisotropic_support(ellipsoid_f, g.x))
    assert t.convex and geom.convex
    assert 1 / geom.kappa.max() == pytest.approx(t.radii.min(), rel=1e-3)
    assert 1 / geom.kappa.min() == pytest.approx(t.radii.max(), rel=1e-3)


@pytest.mark.parametrize("name", ["round_f", "ellipsoid_f", "harmonic_f"])
def test_codazzi_residual_converges(name, request):
    f = request.getfixturevalue(name)
    norms = []
    for n in (16, 32, 64):
        g = build_sphere_grid("full", n)
        c = build_wulff_chart(f, g)
        s = 1 + 0.2 * g.x[..., 2] * g.x[..., 0] + 0.1 * g.x[..., 1] ** 3
        norms.append(codazzi_norm(c, s))
    assert np.all(refinement_order(norms) >= 1.0)
    assert norms[-1] < 0.02


def test_convexity_flags():
    g = build_sphere_grid("full", 16)
    c = build_wulff_chart(Anisotropy.round(), g)
    s = 1 + 3.0 * (3 * g.x[..., 0] ** 2 - 1)
    t = tau_matrix(c, s)
    assert not t.convex and t.bad_node >= 0 and t.radius_floor <= 0
