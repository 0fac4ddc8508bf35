import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from wulffflow.bodies import ellipsoid, harmonic_radial, sphere, wulff
from wulffflow.errors import ConfigError, DomainError
from wulffflow.estimators import FunctionalTransformer, SpectralGapEstimator, WulffFlowEstimator


def test_functional_transformer_features():
    est = FunctionalTransformer(family="round", grid_mode="full", n_theta=32)
    X = est.fit_transform([sphere(2, 1.0), sphere(2, 2.0)])
    names = list(est.get_feature_names_out())
    assert X.shape == (2, len(names)) == (2, est.n_features_out_)
    np.testing.assert_allclose(X[1, names.index("V3")], 4 * np.pi * 8, rtol=1e-10)
    np.testing.assert_allclose(X[:, names.index("I2")], X[0, names.index("I2")], rtol=1e-10)
    assert np.all(X[:, names.index("umbilicity")] < 1e-12)


def test_params_roundtrip_and_clone():
    est = WulffFlowEstimator(family="ellipsoid", semi_axes=(2, 1, 1), k=2, t_max=3.0)
    params = est.get_params()
    assert params["semi_axes"] == (2, 1, 1) and params["t_max"] == 3.0
    twin = clone(est).set_params(t_max=4.0)
    assert twin.t_max == 4.0 and est.t_max == 3.0


def test_flow_estimator_round_sphere():
    est = WulffFlowEstimator(n_theta=16).fit([sphere(2, 1.0)])
    assert est.status_ == ["converged"]
    np.testing.assert_allclose(est.r_bar_, 1.0)
    assert np.isnan(est.decay_rate_[0])
    np.testing.assert_allclose(est.predict(sphere(2, 1.0)), 1.0)
    assert est.transform([sphere(2, 1.0)]).shape == (1, 16, 1)


def test_flow_estimator_short_run_status():
    body = harmonic_radial(2, 1.0, {(1, 0): 1.0}, 0.2)
    est = WulffFlowEstimator(n_theta=16, t_max=0.05).fit([body])
    assert est.status_ == ["timeout"]
    assert est.results_[0].t >= 0.05


def test_spectral_gap_estimator():
    est = SpectralGapEstimator(family="ellipsoid", semi_axes=[2, 1, 1], n_theta=64).fit()
    assert est.lambda1_ == pytest.approx(2.0, rel=2e-3)
    np.testing.assert_allclose(est.predict([1.0, 2.0]), est.lambda1_ / np.array([2.0, 4.0]))
    with pytest.raises(DomainError):
        est.predict([-1.0])


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        FunctionalTransformer().transform([sphere(2)])
    with pytest.raises(NotFittedError):
        SpectralGapEstimator().predict([1.0])


@pytest.mark.parametrize("kw", [dict(family="cubic"), dict(family="ellipsoid", semi_axes=[1, 2]),
                                dict(family="ellipsoid", semi_axes=[1, 2, 3])])
def test_bad_hyperparameters(kw):
    with pytest.raises(ConfigError):
        FunctionalTransformer(**kw).fit()


def test_rejects_non_body_samples():
    est = FunctionalTransformer(n_theta=16).fit()
    with pytest.raises(DomainError):
        est.transform(np.ones((2, 3)))
    with pytest.raises(DomainError):
        est.transform([])


def test_wulff_shapes_have_equal_isoperimetric_ratios():
    est = FunctionalTransformer(family="ellipsoid", semi_axes=[2, 1, 1], grid_mode="full",
                                n_theta=32).fit()
    f = est.anisotropy_
    X = est.transform([wulff(f, 0.5), wulff(f, 2.0), ellipsoid([1, 1, 1])])
    i2 = X[:, list(est.get_feature_names_out()).index("I2")]
    assert i2[0] == pytest.approx(i2[1], rel=1e-10)
    assert i2[2] > i2[0]
