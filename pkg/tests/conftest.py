import math

import numpy as np
import pytest

from axirot.synthetic import CylinderSpec, NoiseSpec, generate_pair, sample_cylinder

TAN5 = math.tan(math.radians(5.0))
# y' chosen so that the single-pair angle equation gives exactly 10 degrees
PAIR_10DEG = (0.1, 0.2, 0.15, 0.2 * (1 - TAN5 * 0.15) / (1 + TAN5 * 0.1))


def cylinder_pairs(alpha_deg, inliers, outliers=0, sigma=0.0, seed=0):
    spec = CylinderSpec(point_count=inliers + outliers)
    points = sample_cylinder(spec, seed)
    return generate_pair(points, math.radians(alpha_deg), spec.axis_distance, NoiseSpec(sigma, seed + 1), outliers)


@pytest.fixture
def pair_10deg():
    return PAIR_10DEG


@pytest.fixture
def exact_15deg_with_outliers():
    """30 exact pairs at 15 degrees followed by 5 deranged outliers."""
    inliers = cylinder_pairs(15.0, 30, seed=11)
    outlier_src = cylinder_pairs(15.0, 5, seed=13).pairs.copy()
    outlier_src[:, 2:] = outlier_src[[1, 2, 3, 4, 0], 2:]
    pairs = np.vstack([inliers.pairs, outlier_src])
    return pairs
