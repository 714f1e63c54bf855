"""Box, center, distance, and IoU primitives.

All coordinates are normalized image units: x is divided by image width and
y by image height at ingest, so thresholds expressed as a fraction of the
image size are plain scalars here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Box2D",
    "Point2D",
    "center",
    "euclidean_distance",
    "iou",
    "iou_matrix",
    "boxes_to_corners",
    "max_iou_vs_others",
]


@dataclass(frozen=True)
class Point2D:
    """A point in normalized image coordinates."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True)
class Box2D:
    """Axis-aligned box in center/size form, normalized image coordinates."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name, value in (("cx", self.cx), ("cy", self.cy), ("w", self.w), ("h", self.h)):
            if not math.isfinite(value):
                raise ValueError(f"non-finite box field {name}={value}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"non-positive box size w={self.w}, h={self.h}")

    def corners(self) -> tuple[float, float, float, float]:
        """(left, top, right, bottom)."""
        hw = self.w / 2.0
        hh = self.h / 2.0
        return (self.cx - hw, self.cy - hh, self.cx + hw, self.cy + hh)

    @property
    def area(self) -> float:
        return self.w * self.h


def center(b: Box2D) -> Point2D:
    """Center of a box as a point."""
    return Point2D(b.cx, b.cy)


def euclidean_distance(a: Point2D, b: Point2D) -> float:
    """L2 distance between two points."""
    return math.hypot(a.x - b.x, a.y - b.y)


def iou(a: Box2D, b: Box2D) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    # Areas from the same corner values as the intersection, so identical
    # boxes come out at exactly 1.0 instead of a few ulp away.
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    union = area_a + area_b - inter
    # Clamp: rounding may push inter/union a few ulp outside [0, 1].
    return min(1.0, max(0.0, inter / union))


def boxes_to_corners(boxes: Sequence[Box2D]) -> np.ndarray:
    """Stack boxes into an (N, 4) array of (left, top, right, bottom) rows."""
    if not boxes:
        return np.zeros((0, 4), dtype=float)
    return np.array([b.corners() for b in boxes], dtype=float)


def iou_matrix(corners_a: np.ndarray, corners_b: np.ndarray) -> np.ndarray:
    """Pairwise IoU for two (N, 4) / (M, 4) corner arrays; returns (N, M)."""
    if corners_a.shape[0] == 0 or corners_b.shape[0] == 0:
        return np.zeros((corners_a.shape[0], corners_b.shape[0]), dtype=float)
    a = corners_a[:, None, :]
    b = corners_b[None, :, :]
    iw = np.minimum(a[..., 2], b[..., 2]) - np.maximum(a[..., 0], b[..., 0])
    ih = np.minimum(a[..., 3], b[..., 3]) - np.maximum(a[..., 1], b[..., 1])
    inter = np.where((iw > 0.0) & (ih > 0.0), iw * ih, 0.0)
    area_a = (corners_a[:, 2] - corners_a[:, 0]) * (corners_a[:, 3] - corners_a[:, 1])
    area_b = (corners_b[:, 2] - corners_b[:, 0]) * (corners_b[:, 3] - corners_b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return np.clip(np.where(inter > 0.0, inter / union, 0.0), 0.0, 1.0)


def max_iou_vs_others(idx: int, boxes: Sequence[Box2D]) -> float:
    """Largest IoU between boxes[idx] and any other box; 0.0 for a singleton."""
    if not 0 <= idx < len(boxes):
        raise IndexError(f"box index {idx} out of range for {len(boxes)} boxes")
    best = 0.0
    ref = boxes[idx]
    for j, other in enumerate(boxes):
        if j == idx:
            continue
        v = iou(ref, other)
        if v > best:
            best = v
    return best
