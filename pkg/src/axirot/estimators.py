"""Rotation-angle estimators over a set of correspondences.

All estimators take an ``(n, 4)`` array whose rows are ``(x, y, x', y')`` in
normalized image coordinates and return an :class:`EstimateResult`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .exceptions import (
    DegenerateCorrespondence,
    EmptyInput,
    InvalidInput,
    InvalidProbability,
    NoConsensus,
    NoPeak,
)
from .geometry import (
    angle_from_correspondence,
    angle_terms,
    pairwise_angles,
    sampson_distances,
    unit_essential,
    unit_residuals,
    wrap_angle,
)
from .validation import check_correspondences

__all__ = [
    "EstimateResult",
    "HistogramConfig",
    "Method",
    "RansacConfig",
    "histogram_estimate",
    "mean_squared_residual",
    "median_estimate",
    "ransac_estimate",
    "refine_angle_ls",
    "required_iterations",
]

_BRACKET_HALF_WIDTH = math.radians(5.0)


class Method(str, Enum):
    RANSAC = "ransac"
    HISTOGRAM = "histogram"
    MEDIAN = "median"


@dataclass(frozen=True)
class RansacConfig:
    """Parameters of the one-point RANSAC estimator.

    Defaults are the values tuned on real tomographic projections; use
    :meth:`synthetic` for the settings of the cylinder experiments.
    """

    success_probability: float = 0.999
    outlier_fraction: float = 0.95
    sampson_threshold: float = 8e-4
    min_inlier_fraction: float = 0.6
    max_iterations_cap: int = 100_000
    rng_seed: int = 0
    sample_size: int = field(default=1, init=False)

    def __post_init__(self):
        if not 0.0 < self.success_probability < 1.0:
            raise InvalidProbability(f"success_probability must be in (0, 1), got {self.success_probability}")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise InvalidProbability(f"outlier_fraction must be in [0, 1), got {self.outlier_fraction}")
        if not self.sampson_threshold > 0:
            raise InvalidInput(f"sampson_threshold must be positive, got {self.sampson_threshold}")
        if not 0.0 < self.min_inlier_fraction <= 1.0:
            raise InvalidInput(f"min_inlier_fraction must be in (0, 1], got {self.min_inlier_fraction}")
        if int(self.max_iterations_cap) < 1:
            raise InvalidInput(f"max_iterations_cap must be positive, got {self.max_iterations_cap}")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise InvalidInput(f"rng_seed must fit in an unsigned 64-bit integer, got {self.rng_seed}")

    @classmethod
    def synthetic(cls, **overrides):
        """Settings used for the synthetic cylinder experiments (70% outliers)."""
        params = dict(
            success_probability=0.999,
            outlier_fraction=0.7,
            sampson_threshold=0.01,
            min_inlier_fraction=0.25,
        )
        params.update(overrides)
        return cls(**params)

    @property
    def iterations(self):
        return min(self.required_iterations, int(self.max_iterations_cap))

    @property
    def required_iterations(self):
        return required_iterations(self.success_probability, self.outlier_fraction, self.sample_size)

    @property
    def truncated(self):
        return self.required_iterations > int(self.max_iterations_cap)


@dataclass(frozen=True)
class HistogramConfig:
    """Histogram of per-pair angles, in degrees.

    Bins are centred on ``range_min_deg + k * bin_width_deg`` for
    ``k = 0 .. (range_max_deg - range_min_deg) / bin_width_deg``, so with the
    defaults every integer degree in ``[-90, 90]`` is a bin centre.
    """

    range_min_deg: float = -90.0
    range_max_deg: float = 90.0
    bin_width_deg: float = 1.0
    min_peak_count: int = 2

    def __post_init__(self):
        if not self.range_min_deg < self.range_max_deg:
            raise InvalidInput("range_min_deg must be below range_max_deg")
        if not self.bin_width_deg > 0:
            raise InvalidInput(f"bin_width_deg must be positive, got {self.bin_width_deg}")
        steps = (self.range_max_deg - self.range_min_deg) / self.bin_width_deg
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise InvalidInput("bin_width_deg must divide the range into at least 2 bins")
        if int(self.min_peak_count) < 1:
            raise InvalidInput(f"min_peak_count must be at least 1, got {self.min_peak_count}")

    @property
    def centers(self):
        k = int(round((self.range_max_deg - self.range_min_deg) / self.bin_width_deg))
        return self.range_min_deg + self.bin_width_deg * np.arange(k + 1)


@dataclass(frozen=True)
class EstimateResult:
    angle: float
    inlier_indices: tuple
    mean_squared_residual: float
    iterations_run: int
    method: Method
    truncated: bool = False

    @property
    def angle_deg(self):
        return math.degrees(self.angle)


def required_iterations(p, epsilon, n=1):
    """Number of draws needed to pick an outlier-free sample with probability ``p``."""
    if not 0.0 < p < 1.0:
        raise InvalidProbability(f"p must be in (0, 1), got {p}")
    if not 0.0 <= epsilon < 1.0:
        raise InvalidProbability(f"epsilon must be in [0, 1), got {epsilon}")
    if n < 1:
        raise InvalidProbability(f"sample size must be at least 1, got {n}")
    clean = (1.0 - epsilon) ** n
    if clean >= 1.0:
        return 1
    return max(1, math.ceil(math.log(1.0 - p) / math.log(1.0 - clean)))


def mean_squared_residual(X, alpha):
    """Mean squared epipolar residual under the scale-normalized model."""
    r = unit_residuals(X, alpha)
    return float(np.mean(r * r))


def _objective_slope(u, v, alpha):
    half = alpha / 2
    r = math.cos(half) * u - math.sin(half) * v
    dr = -(math.sin(half) * u + math.cos(half) * v) / 2
    return float(2.0 * np.mean(r * dr))


def refine_angle_ls(X, initial):
    """Least-squares angle over ``X`` starting from ``initial`` (radians).

    Minimizes the mean squared residual ``cos(a/2) u - sin(a/2) v`` inside
    ``initial +/- 5 deg``, widening the bracket while the minimum sits on
    one of its ends.  Returns ``(angle, mean_squared_residual)``.
    """
    X = check_correspondences(X)
    if not math.isfinite(initial):
        raise InvalidInput(f"initial angle must be finite, got {initial}")
    u, v = angle_terms(X)
    lo, hi = initial - _BRACKET_HALF_WIDTH, initial + _BRACKET_HALF_WIDTH
    # the objective is pi-periodic in a/2, so one minimum per bracket narrower than pi
    while True:
        g_lo, g_hi = _objective_slope(u, v, lo), _objective_slope(u, v, hi)
        if g_lo < 0 < g_hi:
            alpha = brentq(lambda a: _objective_slope(u, v, a), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            break
        if g_lo == 0.0 or g_hi == 0.0:
            alpha = lo if g_lo == 0.0 else hi
            break
        if hi - lo + 2 * _BRACKET_HALF_WIDTH >= math.pi:
            alpha = _grid_minimum(X, lo, hi)
            break
        if g_lo >= 0:
            lo -= _BRACKET_HALF_WIDTH
        if g_hi <= 0:
            hi += _BRACKET_HALF_WIDTH
    alpha = wrap_angle(alpha)
    msr = mean_squared_residual(X, alpha)
    start = mean_squared_residual(X, initial)
    if msr > start:
        return wrap_angle(initial), start
    return alpha, msr


def _grid_minimum(X, lo, hi):
    grid = np.linspace(lo, hi, 2001)
    u, v = angle_terms(X)
    f = [np.mean((math.cos(a / 2) * u - math.sin(a / 2) * v) ** 2) for a in grid]
    return float(grid[int(np.argmin(f))])


def _draw(seed, iteration, n):
    rng = np.random.default_rng([int(seed), int(iteration)])
    return int(rng.integers(n))


def _hypotheses(X, cfg, iterations):
    n = len(X)
    threshold = cfg.sampson_threshold
    needed = cfg.min_inlier_fraction * n
    out = []
    for i in iterations:
        j = _draw(cfg.rng_seed, i, n)
        try:
            alpha = angle_from_correspondence(X[j])
        except DegenerateCorrespondence:
            continue
        mask = sampson_distances(X, unit_essential(alpha)) <= threshold
        # small slack keeps e.g. 0.6 * 5 = 3.0000000000000004 from rejecting 3 inliers
        if mask.sum() >= needed - 1e-9:
            out.append((i, alpha, mask))
    return out


def ransac_estimate(X, cfg=None, n_jobs=1):
    """One-point RANSAC followed by least-squares refinement of each consensus.

    Iteration ``i`` draws its sample from a generator seeded with
    ``(cfg.rng_seed, i)``, so the result does not depend on ``n_jobs``.
    Degenerate samples still count as iterations.
    """
    cfg = cfg or RansacConfig()
    X = check_correspondences(X)
    iterations = cfg.iterations
    if n_jobs is None or n_jobs <= 1 or iterations < 2 * n_jobs:
        candidates = _hypotheses(X, cfg, range(iterations))
    else:
        chunks = np.array_split(np.arange(iterations), n_jobs)
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = pool.map(lambda idx: _hypotheses(X, cfg, idx), chunks)
        candidates = [c for part in parts for c in part]
    if not candidates:
        raise NoConsensus(
            f"no hypothesis reached {cfg.min_inlier_fraction:.3g} inlier fraction in {iterations} iterations"
        )

    refined = {}
    best = None
    for _, alpha, mask in candidates:
        key = mask.tobytes()
        if key not in refined:
            refined[key] = refine_angle_ls(X[mask], alpha)
        angle, msr = refined[key]
        if best is None or msr < best[1]:
            best = (angle, msr, mask)
    angle, msr, mask = best
    return EstimateResult(
        angle=angle,
        inlier_indices=tuple(int(i) for i in np.flatnonzero(mask)),
        mean_squared_residual=msr,
        iterations_run=iterations,
        method=Method.RANSAC,
        truncated=cfg.truncated,
    )


def histogram_estimate(X, cfg=None):
    """Pick the most populated angle bin and refine over its members."""
    cfg = cfg or HistogramConfig()
    X = check_correspondences(X)
    angles = np.degrees(pairwise_angles(X))
    valid = np.flatnonzero(np.isfinite(angles))
    if valid.size == 0:
        raise NoPeak("every correspondence is degenerate; nothing to bin")

    centers = cfg.centers
    w = cfg.bin_width_deg
    idx = np.floor((angles[valid] - (cfg.range_min_deg - w / 2)) / w).astype(int)
    in_range = (idx >= 0) & (idx < len(centers))
    valid, idx = valid[in_range], idx[in_range]
    if valid.size == 0:
        raise NoPeak("no per-pair angle falls inside the histogram range")

    counts = np.bincount(idx, minlength=len(centers))
    peak = counts.max()
    if peak < cfg.min_peak_count:
        raise NoPeak(f"highest bin holds {peak} pair(s), need {cfg.min_peak_count}")
    tied = np.flatnonzero(counts == peak)
    winner = min(tied, key=lambda k: (abs(centers[k]), k))

    members = np.sort(valid[idx == winner])
    angle, msr = refine_angle_ls(X[members], math.radians(centers[winner]))
    return EstimateResult(
        angle=angle,
        inlier_indices=tuple(int(i) for i in members),
        mean_squared_residual=msr,
        iterations_run=0,
        method=Method.HISTOGRAM,
    )


def median_estimate(X):
    """Median of the per-pair angles (mean of the middle two for even counts).

    ``mean_squared_residual`` is taken over every input pair, since the
    median keeps no inlier set of its own.
    """
    X = check_correspondences(X)
    angles = pairwise_angles(X)
    angles = angles[np.isfinite(angles)]
    if angles.size == 0:
        raise DegenerateCorrespondence("every correspondence is degenerate")
    angle = wrap_angle(float(np.median(angles)))
    return EstimateResult(
        angle=angle,
        inlier_indices=(),
        mean_squared_residual=mean_squared_residual(X, angle),
        iterations_run=0,
        method=Method.MEDIAN,
    )


ESTIMATORS = {
    Method.RANSAC: ransac_estimate,
    Method.HISTOGRAM: histogram_estimate,
    Method.MEDIAN: median_estimate,
}
