"""Property-based checks on randomly drawn inputs."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wulffflow import Anisotropy, build_sphere_grid, graph_geometry
from wulffflow.bodies import ellipsoid
from wulffflow.curvature import elementary_all, newton_maclaurin_gap, phi_dual, psi
from wulffflow.functionals import af_check, report_radial

positive = st.floats(0.05, 20.0, allow_nan=False)
kappas = arrays(float, st.integers(2, 5), elements=positive)

_GRID = build_sphere_grid("full", 32)
_ELL = Anisotropy.ellipsoid([2.0, 1.0, 1.0])


@given(kappas)
def test_elementary_symmetric_are_permutation_invariant(k):
    np.testing.assert_allclose(elementary_all(k), elementary_all(k[::-1]), rtol=1e-12)


@given(kappas, st.floats(0.1, 10.0))
def test_elementary_homogeneity(k, c):
    e = elementary_all(k)
    ec = elementary_all(c * k)
    np.testing.assert_allclose(ec, e * c ** np.arange(k.size + 1), rtol=1e-10)


@given(kappas)
def test_newton_maclaurin(k):
    assert newton_maclaurin_gap(k) <= 1e-12


@given(kappas, st.integers(2, 5))
def test_psi_between_min_and_max(k, order):
    order = min(order, k.size)
    v = psi(k, order)
    assert k.min() * (1 - 1e-12) <= v <= k.max() * (1 + 1e-12)
    np.testing.assert_allclose(phi_dual(1 / k, order), 1 / v, rtol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.tuples(*[st.floats(0.6, 1.6)] * 3))
def test_af_nonnegative_for_ellipsoids(axes):
    geom = graph_geometry(_ELL, _GRID, np.log(ellipsoid(list(axes)).radial(_GRID.x)))
    slack = af_check(_ELL, geom, 0)
    assert slack / report_radial(geom).v[2] > -1e-6


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 3.0), st.tuples(*[st.floats(-0.3, 0.3)] * 3))
def test_volume_identity_translation_invariant(r, c):
    from wulffflow.bodies import sphere

    rep = report_radial(graph_geometry(_ELL, _GRID, np.log(sphere(2, r, [r * ci for ci in c]).radial(_GRID.x))))
    assert abs(rep.vol / (4 / 3 * np.pi * r ** 3) - 1) < 1e-3
    assert abs(rep.volume_identity) / rep.v[3] < 1e-6
