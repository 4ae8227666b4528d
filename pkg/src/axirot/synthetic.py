"""Synthetic scenes: sampled cylinders, cubic lattices, and noisy correspondences.

Camera frame: x right, y up, z along the optical axis.  The object rotates
about a vertical axis through ``(0, 0, axis_distance)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BehindCamera, InsufficientPoints, InvalidInput
from .geometry import rotation_about_y
from .validation import check_points

__all__ = [
    "CorrespondenceSet",
    "CylinderSpec",
    "LatticeSpec",
    "NoiseSpec",
    "generate_pair",
    "make_lattice",
    "project",
    "rotate_about_axis",
    "sample_cylinder",
]


@dataclass(frozen=True)
class CylinderSpec:
    axis_distance: float = 200.0
    height: float = 230.0
    radius: float = 115.0
    point_count: int = 100

    def __post_init__(self):
        if not (self.axis_distance > 0 and self.height > 0 and self.radius > 0):
            raise InvalidInput("cylinder dimensions must be positive")
        if not self.radius < self.axis_distance:
            raise InvalidInput("cylinder must lie in front of the camera (radius < axis_distance)")
        if int(self.point_count) < 1:
            raise InvalidInput(f"point_count must be positive, got {self.point_count}")


@dataclass(frozen=True)
class LatticeSpec:
    side: float = 200.0
    center_distance: float = 200.0
    points_per_edge: int = 21

    def __post_init__(self):
        if not (self.side > 0 and self.center_distance > 0):
            raise InvalidInput("lattice side and center_distance must be positive")
        if not self.side / 2 < self.center_distance:
            raise InvalidInput("lattice must lie in front of the camera (side / 2 < center_distance)")
        if int(self.points_per_edge) < 2:
            raise InvalidInput(f"points_per_edge must be at least 2, got {self.points_per_edge}")

    @property
    def spacing(self):
        return self.side / (self.points_per_edge - 1)


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 1e-4
    rng_seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise InvalidInput(f"sigma must be finite and non-negative, got {self.sigma}")


@dataclass(frozen=True)
class CorrespondenceSet:
    pairs: np.ndarray
    ground_truth_angle: float
    inlier_flags: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.pairs) != len(self.inlier_flags):
            raise InvalidInput("pairs and inlier_flags differ in length")

    def __len__(self):
        return len(self.pairs)


def sample_cylinder(spec, seed):
    """Points uniform in the volume of a vertical cylinder, shape ``(n, 3)``."""
    rng = np.random.default_rng(seed)
    n = int(spec.point_count)
    r = spec.radius * np.sqrt(rng.random(n))
    theta = 2 * np.pi * rng.random(n)
    y = spec.height * (rng.random(n) - 0.5)
    return np.column_stack([r * np.cos(theta), y, spec.axis_distance + r * np.sin(theta)])


def make_lattice(spec):
    """Regular ``n x n x n`` grid filling a cube centred on the optical axis."""
    ticks = np.linspace(-spec.side / 2, spec.side / 2, int(spec.points_per_edge))
    gx, gy, gz = np.meshgrid(ticks, ticks, ticks, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel(), gz.ravel() + spec.center_distance])


def rotate_about_axis(points, alpha, axis_distance):
    """Rotate scene points by ``alpha`` about the vertical axis at ``(0, 0, axis_distance)``.

    Uses the same rotation matrix as the epipolar model, which makes the
    generated views satisfy ``q'^T E(alpha) q = 0`` with a positive angle.
    """
    if not axis_distance > 0:
        raise InvalidInput(f"axis_distance must be positive, got {axis_distance}")
    P = check_points(points)
    offset = np.array([0.0, 0.0, axis_distance])
    return (P - offset) @ rotation_about_y(alpha).T + offset


def project(points):
    """Pinhole projection to normalized coordinates; ``(n, 3) -> (n, 2)``."""
    P = check_points(points)
    if np.any(P[:, 2] <= 0):
        raise BehindCamera(f"{int(np.sum(P[:, 2] <= 0))} point(s) with z <= 0")
    out = P[:, :2] / P[:, 2:3]
    return out[0] if np.ndim(points) == 1 else out


def _derangement(rng, k):
    identity = np.arange(k)
    while True:
        perm = rng.permutation(k)
        if not np.any(perm == identity):
            return perm


def generate_pair(points, alpha, axis_distance, noise, outlier_count=0):
    """Two noisy views of ``points`` with ``outlier_count`` re-paired at random.

    The outliers are a random subset whose second-view points are permuted
    among themselves by a derangement, so none keeps its true partner.
    """
    P = check_points(points)
    n = len(P)
    k = int(outlier_count)
    if k < 0 or k > n:
        raise InsufficientPoints(f"cannot make {k} outliers from {n} points")
    if k == 1:
        raise InsufficientPoints("a single outlier cannot be re-paired with anything but itself")

    rng = np.random.default_rng(noise.rng_seed)
    q = project(P)
    q_rot = project(rotate_about_axis(P, alpha, axis_distance))
    if noise.sigma > 0:
        q = q + rng.normal(0.0, noise.sigma, q.shape)
        q_rot = q_rot + rng.normal(0.0, noise.sigma, q_rot.shape)

    flags = np.ones(n, dtype=bool)
    if k:
        chosen = np.sort(rng.choice(n, size=k, replace=False))
        q_rot[chosen] = q_rot[chosen[_derangement(rng, k)]]
        flags[chosen] = False
    return CorrespondenceSet(
        pairs=np.column_stack([q, q_rot]),
        ground_truth_angle=float(alpha),
        inlier_flags=flags,
    )
