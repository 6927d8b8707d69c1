"""Planar homography estimation between image pixels and the court plane.

A ``Homography`` stores the world-to-image matrix. Image-to-court lookups go
through its inverse. Estimation uses the normalized direct linear transform:
both point sets are translated to their centroid and scaled so the mean
distance from the origin is sqrt(2), the 2n x 9 linear system is solved by
SVD, and the result is denormalized. This is exact for four pairs and a
least-squares fit for more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .court import CourtPoint
from .errors import (
    DegenerateConfiguration,
    InsufficientCorrespondences,
    ProjectionSingularity,
    ValidationError,
)

# Homogeneous w below this is treated as a point at infinity.
W_EPSILON = 1e-12

# |det| below this (after scale normalization) means the matrix is not invertible.
DET_EPSILON = 1e-12


@dataclass(frozen=True)
class Correspondence:
    """One matched pair: a court-plane point and its observed pixel."""

    world: CourtPoint
    pixel: Tuple[float, float]

    def __post_init__(self):
        u, v = self.pixel
        if not all(map(math.isfinite, (self.world.x, self.world.y, u, v))):
            raise ValidationError("correspondence coordinates must be finite")


def _normalize_matrix(m: np.ndarray) -> np.ndarray:
    """Scale so the bottom-right entry is 1 when nonzero, else unit Frobenius norm."""
    if abs(m[2, 2]) > W_EPSILON:
        return m / m[2, 2]
    return m / np.linalg.norm(m)


@dataclass(frozen=True)
class Homography:
    """World-plane to image mapping, stored scale-normalized."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise ValidationError("homography must be a finite 3x3 matrix")
        m = _normalize_matrix(m)
        if abs(np.linalg.det(m)) <= DET_EPSILON:
            raise DegenerateConfiguration("homography matrix is not invertible")
        object.__setattr__(self, "matrix", m)

    @staticmethod
    def identity() -> "Homography":
        return Homography(np.eye(3))

    def invert(self) -> "Homography":
        return Homography(np.linalg.inv(self.matrix))

    def world_to_image(self, x: float, y: float) -> Tuple[float, float]:
        u, v = _project(self.matrix, x, y)
        return (u, v)

    def image_to_world(self, u: float, v: float) -> Tuple[float, float]:
        return _project(np.linalg.inv(self.matrix), u, v)


def _project(m: np.ndarray, a: float, b: float) -> Tuple[float, float]:
    vec = m @ (a, b, 1.0)
    w = vec[2]
    if abs(w) <= W_EPSILON:
        raise ProjectionSingularity(f"point ({a}, {b}) maps to infinity (w={w:.3e})")
    return (vec[0] / w, vec[1] / w)


def _hartley_normalization(points: np.ndarray) -> np.ndarray:
    """Similarity transform taking points to zero centroid and mean norm sqrt(2)."""
    centroid = points.mean(axis=0)
    mean_dist = np.linalg.norm(points - centroid, axis=1).mean()
    if mean_dist <= 1e-12:
        raise DegenerateConfiguration("correspondence points are coincident")
    s = math.sqrt(2.0) / mean_dist
    return np.array([
        [s, 0.0, -s * centroid[0]],
        [0.0, s, -s * centroid[1]],
        [0.0, 0.0, 1.0],
    ])


def _collinear(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> bool:
    area2 = abs((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
    span = max(np.linalg.norm(q - p), np.linalg.norm(r - p), 1.0)
    return area2 <= 1e-9 * span * span


def estimate_homography(pairs: Sequence[Correspondence]) -> Homography:
    """Fit the world-to-image homography from matched point pairs.

    Args:
        pairs: at least four correspondences; exactly four must have no three
            collinear points on either side.

    Raises:
        InsufficientCorrespondences: fewer than four pairs.
        DegenerateConfiguration: the layout does not pin down a unique,
            invertible mapping.
    """
    if len(pairs) < 4:
        raise InsufficientCorrespondences(
            f"homography needs at least 4 correspondences, got {len(pairs)}"
        )
    world = np.array([[c.world.x, c.world.y] for c in pairs], dtype=float)
    image = np.array([c.pixel for c in pairs], dtype=float)

    if len(pairs) == 4:
        idx = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        for pts in (world, image):
            if any(_collinear(pts[i], pts[j], pts[k]) for i, j, k in idx):
                raise DegenerateConfiguration("three of four correspondence points are collinear")

    t_world = _hartley_normalization(world)
    t_image = _hartley_normalization(image)
    wn = (t_world @ np.column_stack([world, np.ones(len(pairs))]).T).T
    im = (t_image @ np.column_stack([image, np.ones(len(pairs))]).T).T

    rows = []
    for (x, y, _), (u, v, _) in zip(wn, im):
        rows.append([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v])
        rows.append([x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u])
    a = np.array(rows)

    _, sing, vt = np.linalg.svd(a)
    # A second near-zero singular value means the solution is not unique.
    if len(pairs) > 4 and sing[-2] <= 1e-10 * max(sing[0], 1.0):
        raise DegenerateConfiguration("correspondences do not determine a unique homography")
    h_norm = vt[-1].reshape(3, 3)

    h = np.linalg.inv(t_image) @ h_norm @ t_world
    try:
        return Homography(h)
    except DegenerateConfiguration:
        raise DegenerateConfiguration("estimated homography is singular") from None


def apply_homography(h: Homography, pixel: Tuple[float, float]) -> CourtPoint:
    """Map an image pixel onto the court plane (z = 0)."""
    u, v = pixel
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValidationError("pixel coordinates must be finite")
    x, y = h.image_to_world(u, v)
    return CourtPoint(x, y, 0.0)


def reprojection_error(h: Homography, pairs: Iterable[Correspondence]) -> dict:
    """Pixel errors of the world-to-image mapping over the given pairs.

    Returns max and median Euclidean error in pixels. The median uses the
    lower of the two middle values for even counts so reported figures are
    always errors that actually occurred.
    """
    errors = []
    for c in pairs:
        u, v = h.world_to_image(c.world.x, c.world.y)
        errors.append(math.hypot(u - c.pixel[0], v - c.pixel[1]))
    if not errors:
        raise ValidationError("reprojection error needs at least one correspondence")
    errors.sort()
    return {
        "max_px": errors[-1],
        "median_px": errors[(len(errors) - 1) // 2],
        "count": len(errors),
    }
