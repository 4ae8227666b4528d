"""scikit-learn compatible wrappers around the angle estimators.

``X`` is always an ``(n, 4)`` array of ``(x, y, x', y')`` correspondences.
Fitting stores the angle in ``angle_`` (radians) and ``angle_deg_``.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .estimators import (
    HistogramConfig,
    RansacConfig,
    histogram_estimate,
    mean_squared_residual,
    median_estimate,
    ransac_estimate,
)
from .geometry import DEGENERACY_TOL, pairwise_angles, sampson_distances, unit_essential
from .validation import check_correspondences

__all__ = [
    "HistogramAngleEstimator",
    "MedianAngleEstimator",
    "PairwiseAngles",
    "RansacAngleEstimator",
]


class _AngleEstimatorMixin:
    def _store(self, X, result):
        self.angle_ = result.angle
        self.angle_deg_ = math.degrees(result.angle)
        self.inlier_indices_ = np.asarray(result.inlier_indices, dtype=int)
        mask = np.zeros(len(X), dtype=bool)
        mask[self.inlier_indices_] = True
        self.inlier_mask_ = mask
        self.mean_squared_residual_ = result.mean_squared_residual
        self.n_iter_ = result.iterations_run
        self.n_features_in_ = X.shape[1]
        return self

    def sampson_distances(self, X):
        """Sampson distance of every correspondence to the fitted model."""
        check_is_fitted(self, "angle_")
        return sampson_distances(check_correspondences(X), unit_essential(self.angle_))

    def score(self, X, y=None):
        """Negative mean squared epipolar residual (higher is better)."""
        check_is_fitted(self, "angle_")
        return -mean_squared_residual(check_correspondences(X), self.angle_)


class RansacAngleEstimator(_AngleEstimatorMixin, BaseEstimator):
    """One-point RANSAC angle estimator.

    ``predict`` labels correspondences as inliers (1) or outliers (0) using
    the fitted angle and ``sampson_threshold``.
    """

    def __init__(
        self,
        success_probability=0.999,
        outlier_fraction=0.95,
        sampson_threshold=8e-4,
        min_inlier_fraction=0.6,
        max_iterations_cap=100_000,
        random_state=0,
        n_jobs=1,
    ):
        self.success_probability = success_probability
        self.outlier_fraction = outlier_fraction
        self.sampson_threshold = sampson_threshold
        self.min_inlier_fraction = min_inlier_fraction
        self.max_iterations_cap = max_iterations_cap
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_correspondences(X)
        cfg = RansacConfig(
            success_probability=self.success_probability,
            outlier_fraction=self.outlier_fraction,
            sampson_threshold=self.sampson_threshold,
            min_inlier_fraction=self.min_inlier_fraction,
            max_iterations_cap=self.max_iterations_cap,
            rng_seed=self.random_state,
        )
        return self._store(X, ransac_estimate(X, cfg, n_jobs=self.n_jobs))

    def predict(self, X):
        return (self.sampson_distances(X) <= self.sampson_threshold).astype(int)


class HistogramAngleEstimator(_AngleEstimatorMixin, BaseEstimator):
    def __init__(self, range_min_deg=-90.0, range_max_deg=90.0, bin_width_deg=1.0, min_peak_count=2):
        self.range_min_deg = range_min_deg
        self.range_max_deg = range_max_deg
        self.bin_width_deg = bin_width_deg
        self.min_peak_count = min_peak_count

    def fit(self, X, y=None):
        X = check_correspondences(X)
        cfg = HistogramConfig(self.range_min_deg, self.range_max_deg, self.bin_width_deg, self.min_peak_count)
        return self._store(X, histogram_estimate(X, cfg))

    def predict(self, X):
        """1 where a pair's own angle falls in the winning bin, else 0."""
        check_is_fitted(self, "angle_")
        angles = np.degrees(pairwise_angles(check_correspondences(X)))
        center = self.angle_deg_
        with np.errstate(invalid="ignore"):
            return (np.abs(angles - center) <= self.bin_width_deg / 2).astype(int)


class MedianAngleEstimator(_AngleEstimatorMixin, BaseEstimator):
    def fit(self, X, y=None):
        X = check_correspondences(X)
        return self._store(X, median_estimate(X))


class PairwiseAngles(TransformerMixin, BaseEstimator):
    """Stateless transformer mapping each correspondence to its own angle.

    Output has one column in radians, or degrees with ``degrees=True``;
    degenerate pairs come out as NaN.
    """

    def __init__(self, degrees=False, eta=DEGENERACY_TOL):
        self.degrees = degrees
        self.eta = eta

    def fit(self, X, y=None):
        self.n_features_in_ = check_correspondences(X).shape[1]
        return self

    def transform(self, X):
        angles = pairwise_angles(check_correspondences(X), eta=self.eta)
        if self.degrees:
            angles = np.degrees(angles)
        return angles.reshape(-1, 1)
