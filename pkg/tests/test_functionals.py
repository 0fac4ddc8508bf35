import numpy as np
import pytest

from wulffflow import Anisotropy, build_sphere_grid, graph_geometry
from wulffflow.bodies import ellipsoid, harmonic_radial, sphere, wulff
from wulffflow.errors import DomainError
from wulffflow.functionals import (af_check, isoperimetric_ratio, mc_mixed_volume,
                                   minkowski_residual, mixed_volume_surface, report_radial)

from conftest import refinement_order


def _geom(f, body, n=48):
    g = build_sphere_grid("full", n)
    return graph_geometry(f, g, np.log(body.radial(g.x)))


def test_round_ball_mixed_volumes():
    f = Anisotropy.round()
    for rho in (1.0, 2.5):
        geom = _geom(f, sphere(2, rho))
        for m in range(4):
            assert mixed_volume_surface(geom, m) == pytest.approx(4 * np.pi * rho ** m, rel=1e-10)


@pytest.mark.parametrize("name", ["ellipsoid_f", "harmonic_f"])
def test_wulff_shape_mixed_volumes(name, request):
    f = request.getfixturevalue(name)
    wv = f.wulff_volume()
    errs = []
    for n in (16, 32, 64):
        rep = report_radial(_geom(f, wulff(f, 0.8), n))
        errs.append(np.abs(rep.v / (3 * wv * 0.8 ** np.arange(4)) - 1).max())
    assert errs[-1] < 2e-5
    assert refinement_order(errs)[-1] >= 2.0


def test_isoperimetric_ratio_scale_invariant(harmonic_f):
    body = harmonic_radial(2, 1.0, {(2, 0): 1.0, (2, 2): 0.5}, 0.15)
    a = report_radial(_geom(harmonic_f, body))
    b = report_radial(_geom(harmonic_f, body.scaled(3.0)))
    for k in (1, 2, 3):
        assert isoperimetric_ratio(a, k) == pytest.approx(isoperimetric_ratio(b, k), rel=1e-10)


def test_isoperimetric_ratio_of_wulff_shape(ellipsoid_f):
    rep = report_radial(_geom(ellipsoid_f, wulff(ellipsoid_f, 1.3)))
    w = 3 * ellipsoid_f.wulff_volume()
    for k in (2, 3):
        assert rep.isoperimetric(k) == pytest.approx(w ** (1 - (4 - k) / 3), rel=1e-4)


def test_isoperimetric_ratio_bounds():
    rep = report_radial(_geom(Anisotropy.round(), sphere(2, 1.0)))
    with pytest.raises(DomainError):
        isoperimetric_ratio(rep, 0)
    with pytest.raises(DomainError):
        isoperimetric_ratio(rep, 4)


@pytest.mark.parametrize("name", ["round_f", "ellipsoid_f", "harmonic_f"])
def test_minkowski_identities(name, request):
    f = request.getfixturevalue(name)
    body = ellipsoid([1.2, 0.9, 1.0], center=[0.1, -0.05, 0.0])
    geom = _geom(f, body, 64)
    scale = report_radial(geom).v
    for k in (0, 1):
        res, vol_res = minkowski_residual(geom, k)
        assert abs(res) / scale[2 - k] < 1e-4
        assert abs(vol_res) / scale[3] < 1e-6


def test_af_slack_positive_off_wulff(ellipsoid_f):
    geom = _geom(ellipsoid_f, ellipsoid([1.0, 1.0, 1.0]), 64)
    assert af_check(ellipsoid_f, geom, 0) > 1e-3
    geom_w = _geom(ellipsoid_f, wulff(ellipsoid_f, 0.7), 64)
    assert abs(af_check(ellipsoid_f, geom_w, 0)) < 1e-6


def test_af_range_checked(round_f):
    geom = _geom(round_f, sphere(2, 1.0), 16)
    with pytest.raises(DomainError):
        af_check(round_f, geom, 1)


def test_mc_round_ball_small():
    est = mc_mixed_volume(Anisotropy.round(), sphere(2, 1.0), n_samples=200_000,
                          n_directions=600, seed=3)
    exact = 4 * np.pi
    for m in range(4):
        v, se = est[m]
        assert abs(v - exact) < max(4 * se, 0.1 * exact)
    assert est.samples >= 200_000


def test_mc_seed_reproducible():
    kw = dict(n_samples=20_000, n_directions=200, seed=11)
    a = mc_mixed_volume(Anisotropy.round(), sphere(2, 1.0), **kw)
    b = mc_mixed_volume(Anisotropy.round(), sphere(2, 1.0), **kw)
    np.testing.assert_array_equal(a.values, b.values)


def test_mc_needs_enough_eps():
    with pytest.raises(DomainError):
        mc_mixed_volume(Anisotropy.round(), sphere(2, 1.0), n_eps=3, n_samples=100)
