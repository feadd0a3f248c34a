"""Cylindrical layout: wrap the 2-D embedding around the listener.

The embedding's x axis becomes the angle theta = 2*pi * (x - x_min) /
(x_max - x_min), every point sits at the fixed radius r in the horizontal
plane, and the embedding's y axis passes through unchanged as elevation:

    x3 = r * cos(theta),  y3 = r * sin(theta),  z3 = y2d

A listener at the origin is therefore equidistant (horizontally) from all
points. The formula maps the points at x_min and x_max to the same
direction (theta 0 vs 2*pi); that colliding pair is reported as a seam
diagnostic rather than silently adjusted.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import as_float_matrix


@dataclass
class Point3D:
    x: float
    y: float
    z: float
    theta: float
    segment_index: int


def cylindrical_map(coords, radius=5.0):
    """Project N x 2 embedding coordinates onto a cylinder of the given radius.

    Returns points in input order. Raises when N < 2 or when all x values
    coincide (the angle would be undefined).
    """
    coords = as_float_matrix(coords, "coords", min_rows=2)
    if coords.shape[1] != 2:
        raise ValueError("coords must be N x 2")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    x2d, y2d = coords[:, 0], coords[:, 1]
    x_min, x_max = float(x2d.min()), float(x2d.max())
    if x_max == x_min:
        raise ValueError("degenerate embedding: all x coordinates are equal")
    theta = 2.0 * np.pi * (x2d - x_min) / (x_max - x_min)
    return [
        Point3D(x=float(radius * np.cos(t)), y=float(radius * np.sin(t)),
                z=float(y2d[i]), theta=float(t), segment_index=i)
        for i, t in enumerate(theta)
    ]


def seam_pair(points):
    """Indices of the colliding pair: the points mapped to theta 0 and 2*pi."""
    lo = min(points, key=lambda p: p.theta)
    hi = max(points, key=lambda p: p.theta)
    return lo.segment_index, hi.segment_index


def vertical_fit(points, z_lo, z_hi):
    """Affinely rescale elevations into [z_lo, z_hi], preserving order.

    When every elevation is equal, all points move to the interval
    midpoint. This is an opt-in comfort adjustment; the pipeline default
    keeps elevations untouched.
    """
    if not z_hi > z_lo:
        raise ValueError(f"need z_hi > z_lo, got [{z_lo}, {z_hi}]")
    zs = np.array([p.z for p in points], dtype=np.float64)
    lo, hi = float(zs.min()), float(zs.max())
    if hi == lo:
        fitted = np.full_like(zs, (z_lo + z_hi) / 2.0)
    else:
        fitted = z_lo + (zs - lo) * (z_hi - z_lo) / (hi - lo)
    return [
        Point3D(x=p.x, y=p.y, z=float(fitted[i]), theta=p.theta,
                segment_index=p.segment_index)
        for i, p in enumerate(points)
    ]


class CylindricalProjector(BaseEstimator, TransformerMixin):
    """Estimator wrapper: transform(X: N x 2) -> N x 3 cylinder coordinates."""

    def __init__(self, radius=5.0):
        self.radius = radius

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        points = cylindrical_map(X, radius=self.radius)
        self.theta_ = np.array([p.theta for p in points])
        return np.array([[p.x, p.y, p.z] for p in points])
