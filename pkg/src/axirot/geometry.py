"""One-parameter epipolar model for an object rotating about a vertical axis.

Points are normalized image coordinates (unit focal length, principal point at
the origin) so ``q = (x, y, 1)``.  Angles are radians everywhere in the library.

Two views related by a rotation ``alpha`` about an axis parallel to ``y`` obey
``q'^T E(alpha) q = 0`` where, after simplification,

    E(alpha) = [[0,          -(1 - cos a), 0     ],
                [-(1 - cos a), 0,          -sin a],
                [0,           sin a,        0    ]]

and a single correspondence fixes the angle through
``alpha = 2 * arctan(u / v)`` with ``u = y - y'`` and ``v = x'y + xy'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DegenerateCorrespondence, NonPositiveRadius, UndefinedDistance

__all__ = [
    "DEGENERACY_TOL",
    "Correspondence",
    "EssentialMatrix",
    "RigidMotion",
    "angle_from_correspondence",
    "angle_terms",
    "cross_matrix",
    "epipolar_residual",
    "epipolar_residuals",
    "essential_from_angle",
    "motion_from_angle",
    "pairwise_angles",
    "rotation_about_y",
    "sampson_distance",
    "sampson_distances",
    "unit_essential",
    "unit_residuals",
    "wrap_angle",
]

DEGENERACY_TOL = 1e-12


def wrap_angle(alpha):
    """Map an angle (radians, scalar or array) into ``(-pi, pi]``."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(alpha, dtype=float), 2 * np.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


class Correspondence(NamedTuple):
    """A pair of normalized points ``q = (x, y)`` and ``q' = (x_prime, y_prime)``."""

    x: float
    y: float
    x_prime: float
    y_prime: float

    @property
    def first(self):
        return (self.x, self.y)

    @property
    def second(self):
        return (self.x_prime, self.y_prime)

    def swapped(self):
        return Correspondence(self.x_prime, self.y_prime, self.x, self.y)


def _as_pair(c):
    x, y, xp, yp = (float(v) for v in c)
    if not all(math.isfinite(v) for v in (x, y, xp, yp)):
        raise ValueError(f"correspondence coordinates must be finite, got {tuple(c)}")
    return x, y, xp, yp


def _as_pairs(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != 4:
        raise ValueError(f"expected an (n, 4) array of correspondences, got shape {X.shape}")
    return X


def cross_matrix(t):
    """Skew-symmetric matrix ``[t]_x`` with ``[t]_x @ w == cross(t, w)``."""
    tx, ty, tz = np.asarray(t, dtype=float)
    return np.array([[0.0, -tz, ty], [tz, 0.0, -tx], [-ty, tx, 0.0]])


def rotation_about_y(alpha):
    # Sign chosen so that cross_matrix(t) @ R reproduces E(alpha) exactly.
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


@dataclass(frozen=True)
class EssentialMatrix:
    m: np.ndarray
    alpha: float


@dataclass(frozen=True)
class RigidMotion:
    rotation: np.ndarray
    translation: np.ndarray
    radius: float


def essential_from_angle(alpha):
    """Essential matrix of a circular motion by ``alpha`` radians."""
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha}")
    s = math.sin(alpha)
    # 1 - cos(a) computed as 2 sin^2(a/2) to keep precision near zero
    k = 2.0 * math.sin(alpha / 2) ** 2
    m = np.array([[0.0, -k, 0.0], [-k, 0.0, -s], [0.0, s, 0.0]])
    return EssentialMatrix(m=m, alpha=alpha)


def unit_essential(alpha):
    """``E(alpha)`` divided by ``2 sin(alpha/2)``.

    The result has Frobenius norm sqrt(2) for every angle and tends to a pure
    x-translation model as ``alpha -> 0`` instead of vanishing, which makes
    residuals comparable across angles.
    """
    s, c = math.sin(alpha / 2), math.cos(alpha / 2)
    return np.array([[0.0, -s, 0.0], [-s, 0.0, -c], [0.0, c, 0.0]])


def motion_from_angle(alpha, radius):
    """Rotation and translation of the equivalent camera moving on a circle."""
    if not radius > 0:
        raise NonPositiveRadius(f"radius must be positive, got {radius}")
    alpha = float(alpha)
    t = radius * np.array([math.sin(alpha), 0.0, 2.0 * math.sin(alpha / 2) ** 2])
    return RigidMotion(rotation=rotation_about_y(alpha), translation=t, radius=float(radius))


def angle_terms(X):
    """Return ``(u, v)`` arrays with ``u = y - y'`` and ``v = x'y + xy'``."""
    X = _as_pairs(X)
    x, y, xp, yp = X.T
    return y - yp, xp * y + x * yp


def angle_from_correspondence(c, eta=DEGENERACY_TOL):
    """Rotation angle implied by one correspondence, in ``(-pi, pi]``.

    Raises DegenerateCorrespondence when ``|u| <= eta`` and ``|v| <= eta``.
    """
    x, y, xp, yp = _as_pair(c)
    u = y - yp
    v = xp * y + x * yp
    if abs(u) <= eta and abs(v) <= eta:
        raise DegenerateCorrespondence(
            f"u = {u:.3g}, v = {v:.3g}: point lies on an ill-conditioned plane"
        )
    if v == 0.0:
        return math.pi
    return wrap_angle(2.0 * math.atan(u / v))


def pairwise_angles(X, eta=DEGENERACY_TOL):
    """Vectorized angle per correspondence; NaN where the pair is degenerate."""
    u, v = angle_terms(X)
    degenerate = (np.abs(u) <= eta) & (np.abs(v) <= eta)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2.0 * np.arctan(u / v)
    out[(v == 0.0) & ~degenerate] = np.pi
    out[degenerate] = np.nan
    return out


def epipolar_residual(c, e):
    """``q'^T E q`` for one correspondence."""
    x, y, xp, yp = _as_pair(c)
    m = e.m if isinstance(e, EssentialMatrix) else np.asarray(e, dtype=float)
    return float(np.array([xp, yp, 1.0]) @ m @ np.array([x, y, 1.0]))


def epipolar_residuals(X, e):
    X = _as_pairs(X)
    m = e.m if isinstance(e, EssentialMatrix) else np.asarray(e, dtype=float)
    n = len(X)
    q = np.column_stack([X[:, 0], X[:, 1], np.ones(n)])
    qp = np.column_stack([X[:, 2], X[:, 3], np.ones(n)])
    return np.einsum("ij,jk,ik->i", qp, m, q)


def unit_residuals(X, alpha):
    """Residuals under ``unit_essential(alpha)``: ``cos(a/2) u - sin(a/2) v``."""
    u, v = angle_terms(X)
    return math.cos(alpha / 2) * u - math.sin(alpha / 2) * v


def _sampson_parts(X, m):
    n = len(X)
    q = np.column_stack([X[:, 0], X[:, 1], np.ones(n)])
    qp = np.column_stack([X[:, 2], X[:, 3], np.ones(n)])
    Eq = q @ m.T
    ETqp = qp @ m
    num = np.einsum("ij,ij->i", qp, Eq) ** 2
    den = Eq[:, 0] ** 2 + Eq[:, 1] ** 2 + ETqp[:, 0] ** 2 + ETqp[:, 1] ** 2
    return num, den


def sampson_distance(c, e):
    """First-order geometric distance of ``c`` to the epipolar constraint."""
    m = e.m if isinstance(e, EssentialMatrix) else np.asarray(e, dtype=float)
    num, den = _sampson_parts(np.array([_as_pair(c)]), m)
    if den[0] == 0.0:
        raise UndefinedDistance("Sampson denominator vanishes for this matrix and pair")
    return math.sqrt(num[0] / den[0])


def sampson_distances(X, e):
    """Vectorized Sampson distance; pairs with a zero denominator get ``inf``."""
    X = _as_pairs(X)
    m = e.m if isinstance(e, EssentialMatrix) else np.asarray(e, dtype=float)
    num, den = _sampson_parts(X, m)
    out = np.full(len(X), np.inf)
    ok = den > 0
    out[ok] = np.sqrt(num[ok] / den[ok])
    return out
