import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from axirot import HistogramAngleEstimator, MedianAngleEstimator, PairwiseAngles, RansacAngleEstimator
from axirot.exceptions import EmptyInput, InvalidInput, NoConsensus

from conftest import cylinder_pairs

ESTIMATORS = [
    RansacAngleEstimator(sampson_threshold=1e-6, outlier_fraction=0.5, random_state=3),
    HistogramAngleEstimator(),
    MedianAngleEstimator(),
]


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_fit_on_exact_fixture(est, exact_15deg_with_outliers):
    fitted = clone(est).fit(exact_15deg_with_outliers)
    assert fitted.angle_deg_ == pytest.approx(15.0, abs=1e-6)
    assert fitted.angle_ == pytest.approx(math.radians(15.0), abs=1e-9)
    assert fitted.n_features_in_ == 4
    assert fitted.score(exact_15deg_with_outliers[:30]) == pytest.approx(0.0, abs=1e-20)
    assert fitted.inlier_mask_.shape == (35,)


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_clone_round_trips_params(est):
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert twin is not est


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_unfitted(est):
    with pytest.raises(NotFittedError):
        clone(est).score(np.zeros((1, 4)))


def test_ransac_predict_labels_true_inliers(exact_15deg_with_outliers):
    est = RansacAngleEstimator(sampson_threshold=1e-6, outlier_fraction=0.5).fit(exact_15deg_with_outliers)
    labels = est.predict(exact_15deg_with_outliers)
    assert set(np.unique(labels)) <= {0, 1}
    assert labels[:30].all()
    assert np.array_equal(np.flatnonzero(labels), est.inlier_indices_)


def test_ransac_matches_functional_api(exact_15deg_with_outliers):
    from axirot import RansacConfig, ransac_estimate

    est = RansacAngleEstimator(random_state=11, n_jobs=2).fit(exact_15deg_with_outliers)
    ref = ransac_estimate(exact_15deg_with_outliers, RansacConfig(rng_seed=11))
    assert est.angle_ == ref.angle and est.n_iter_ == ref.iterations_run


def test_ransac_set_params_changes_outcome():
    a, b = cylinder_pairs(15.0, 100, seed=3).pairs, cylinder_pairs(15.0, 100, seed=4).pairs
    X = np.column_stack([a[:, :2], b[::-1, 2:]])
    est = RansacAngleEstimator(sampson_threshold=1e-6)
    with pytest.raises(NoConsensus):
        est.fit(X)
    est.set_params(sampson_threshold=10.0, min_inlier_fraction=0.01)
    assert np.isfinite(est.fit(X).angle_)


def test_histogram_predict():
    X = cylinder_pairs(20.0, 10, sigma=1e-5, seed=1).pairs
    est = HistogramAngleEstimator(bin_width_deg=2.0).fit(X)
    assert est.predict(X).all()
    assert est.n_iter_ == 0


def test_invalid_params_raise_on_fit():
    with pytest.raises(InvalidInput):
        HistogramAngleEstimator(bin_width_deg=0.7).fit(cylinder_pairs(20.0, 5).pairs)


def test_input_validation():
    with pytest.raises(EmptyInput):
        MedianAngleEstimator().fit(np.empty((0, 4)))
    with pytest.raises(InvalidInput):
        MedianAngleEstimator().fit(np.zeros((3, 3)))
    with pytest.raises(InvalidInput):
        MedianAngleEstimator().fit([[0.1, 0.2, 0.3, np.inf]])


def test_pairwise_angles_transformer():
    X = np.vstack([cylinder_pairs(-25.0, 4, seed=2).pairs, [[0.3, 0.0, 0.3, 0.0]]])
    out = PairwiseAngles(degrees=True).fit_transform(X)
    assert out.shape == (5, 1)
    assert np.allclose(out[:4, 0], -25.0, atol=1e-9)
    assert np.isnan(out[4, 0])
    assert np.allclose(PairwiseAngles().fit_transform(X[:4]), math.radians(-25.0), atol=1e-12)
