import warnings

import numpy as np
import pytest

from wulffflow import Anisotropy, build_sphere_grid
from wulffflow.chart import build_wulff_chart
from wulffflow.errors import DomainError
from wulffflow.spectral import (build_operator, fit_decay, fourier_diff_matrix, predicted_rate)

from conftest import refinement_order


def _op(f, mode, n):
    return build_operator(build_wulff_chart(f, build_sphere_grid(mode, n, n=f.n)))


def _weighted_norm(op, v):
    return float(np.sqrt(np.sum(op.mass * v.ravel() ** 2)))


def test_fourier_diff_matrix_exact_on_trig():
    m = 16
    phi = 2 * np.pi * np.arange(m) / m
    d = fourier_diff_matrix(m)
    np.testing.assert_allclose(d @ np.sin(3 * phi), 3 * np.cos(3 * phi), atol=1e-12)
    np.testing.assert_allclose(d.sum(axis=1), 0.0, atol=1e-12)


@pytest.mark.parametrize("name", ["round_f", "ellipsoid_f", "harmonic_f"])
def test_constants_in_kernel_and_symmetry(name, request):
    op = _op(request.getfixturevalue(name), "full", 16)
    assert np.abs(op.apply(np.ones(op.chart.grid.shape))).max() == 0.0
    assert op.weighted_asymmetry() < 1e-13
    assert np.all(op.mass > 0)


def test_mass_sums_to_wulff_area(ellipsoid_f):
    errs = []
    for n in (16, 32, 64):
        op = _op(ellipsoid_f, "full", n)
        errs.append(abs(op.mass.sum() / op.chart.area - 1))
    assert errs[-1] < 1e-4
    assert refinement_order(errs)[-1] >= 1.9


def test_no_spurious_kernel_from_phi_nyquist_mode():
    op = _op(Anisotropy.round(), "full", 16)
    nyq = np.broadcast_to((-1.0) ** np.arange(op.chart.grid.shape[1]), op.chart.grid.shape)
    assert -np.sum(op.mass * nyq.ravel() * op.apply(nyq).ravel()) > 1.0
    vals = op.spectrum(4)
    assert abs(vals[0]) < 1e-8 and vals[1] > 1.5


def test_round_linear_functions_are_eigenfunctions():
    # -L x_i = n x_i; consistency in the mu_F-weighted L2 norm
    errs = []
    for n in (16, 32, 64):
        op = _op(Anisotropy.round(), "full", n)
        x3 = op.chart.grid.x[..., 2]
        errs.append(_weighted_norm(op, op.apply(x3) + 2 * x3) / _weighted_norm(op, x3))
    assert errs[-1] < 2e-3
    assert refinement_order(errs)[-1] >= 1.8


def test_round_lambda1_full_grid():
    op = _op(Anisotropy.round(), "full", 32)
    vals = op.spectrum(6)
    assert abs(vals[0]) < 1e-8
    np.testing.assert_allclose(vals[1:4], 2.0, rtol=5e-3)
    assert op.lambda1() == pytest.approx(2.0, rel=5e-3)


def test_round_lambda1_axisymmetric_n3():
    op = _op(Anisotropy.round(3), "axisymmetric", 64)
    assert op.lambda1() == pytest.approx(3.0, rel=2e-3)


def test_ellipsoid_lambda1_converges_at_second_order(ellipsoid_f):
    lam = [_op(ellipsoid_f, "full", n).lambda1() for n in (16, 32)]
    lam.append(_op(ellipsoid_f, "axisymmetric", 128).lambda1())
    errs = [abs(v - 2.0) for v in lam[:2]]
    assert refinement_order(errs)[-1] >= 1.9
    assert lam[2] == pytest.approx(2.0, rel=1e-3)


def test_predicted_rate():
    assert predicted_rate(2.0, 2, 1.0) == pytest.approx(1.0)
    assert predicted_rate(3.0, 3, 2.0) == pytest.approx(0.5)


def test_fit_decay_recovers_exponent():
    t = np.linspace(0, 40, 400)
    fit = fit_decay(t, 3 * np.exp(-0.7 * t))
    assert fit.rate == pytest.approx(0.7, rel=1e-10)
    assert fit.r2 == pytest.approx(1.0)
    lo, hi = fit.ci95
    assert lo <= fit.rate <= hi


def test_fit_decay_ignores_roundoff_floor():
    t = np.linspace(0, 80, 800)
    d = np.maximum(np.exp(-0.7 * t), 1e-16)
    assert fit_decay(t, d).rate == pytest.approx(0.7, rel=1e-8)


def test_fit_decay_noisy(rng):
    t = np.linspace(0, 30, 300)
    d = np.exp(-0.5 * t + 0.01 * rng.normal(size=t.size))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fit = fit_decay(t, d)
    assert abs(fit.rate - 0.5) < 4 * fit.stderr + 1e-3


@pytest.mark.parametrize("args", [([0, 1], [1.0]), ([0, 1, 2], [0.0, 1, 1]),
                                  (np.arange(5), np.ones(5))])
def test_fit_decay_rejects_bad_input(args):
    with pytest.raises(DomainError):
        fit_decay(*args)
