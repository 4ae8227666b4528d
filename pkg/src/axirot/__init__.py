"""Axial rotation angle estimation from two-view point correspondences."""

from .estimators import (
    EstimateResult,
    HistogramConfig,
    Method,
    RansacConfig,
    histogram_estimate,
    median_estimate,
    ransac_estimate,
    refine_angle_ls,
    required_iterations,
)
from .exceptions import (
    AxirotError,
    BehindCamera,
    DegenerateCorrespondence,
    EmptyFile,
    EmptyInput,
    InsufficientPoints,
    InvalidInput,
    InvalidProbability,
    Malformed,
    NoConsensus,
    NonPositiveRadius,
    NoPeak,
    UndefinedDistance,
)
from .geometry import (
    Correspondence,
    EssentialMatrix,
    RigidMotion,
    angle_from_correspondence,
    epipolar_residual,
    essential_from_angle,
    motion_from_angle,
    pairwise_angles,
    sampson_distance,
)
from .models import HistogramAngleEstimator, MedianAngleEstimator, PairwiseAngles, RansacAngleEstimator

__version__ = "0.1.0"
