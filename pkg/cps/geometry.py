"""
Axis-aligned boxes in physical and frequency space, and the grid-based
covering radius shared by the point-set and spectrum diagnostics.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from utils.config import Config
from cps.errors import EmptySet


@dataclass(frozen=True)
class Box:
    """Closed box [lo_1, hi_1] x ... x [lo_d, hi_d]"""
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'lo', tuple(float(v) for v in self.lo))
        object.__setattr__(self, 'hi', tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError(f"Box bounds differ in dimension: {self.lo} vs {self.hi}")
        if not all(np.isfinite(self.lo)) or not all(np.isfinite(self.hi)):
            raise ValueError("Box bounds must be finite")

    @classmethod
    def centered(cls, radius: float, dim: int) -> 'Box':
        return cls((-radius,) * dim, (radius,) * dim)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> 'Box':
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def is_empty(self) -> bool:
        return any(h < l for l, h in zip(self.lo, self.hi))

    @property
    def widths(self) -> np.ndarray:
        return np.maximum(np.subtract(self.hi, self.lo), 0.0)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lo) + np.asarray(self.hi)) / 2.0

    def scaled(self, factor: float) -> 'Box':
        """Box with the same center and widths multiplied by factor"""
        c = self.center
        half = self.widths / 2.0 * factor
        return Box(tuple(c - half), tuple(c + half))

    def shrunk(self, margin: float) -> 'Box':
        return Box(tuple(np.asarray(self.lo) + margin), tuple(np.asarray(self.hi) - margin))

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.asarray(self.lo) - tol
        hi = np.asarray(self.hi) + tol
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def covers(self, other: 'Box', tol: float = 1e-12) -> bool:
        return all(a <= b + tol for a, b in zip(self.lo, other.lo)) and \
            all(a >= b - tol for a, b in zip(self.hi, other.hi))

    def corners(self) -> np.ndarray:
        grids = np.meshgrid(*[(l, h) for l, h in zip(self.lo, self.hi)], indexing='ij')
        return np.stack([g.ravel() for g in grids], axis=1)


def grid_points(box: Box, steps: int) -> np.ndarray:
    """Regular grid with steps intervals per axis (steps + 1 nodes)"""
    axes = [np.linspace(l, h, steps + 1) if h > l else np.array([l])
            for l, h in zip(box.lo, box.hi)]
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=1)


def _interval_covering_radius(x: np.ndarray, lo: float, hi: float) -> float:
    """Exact sup over t in [lo, hi] of the distance to the nearest x"""
    x = np.sort(x)
    mids = (x[:-1] + x[1:]) / 2.0
    probes = np.concatenate([[lo, hi], mids[(mids >= lo) & (mids <= hi)]])
    right = np.clip(np.searchsorted(x, probes), 0, len(x) - 1)
    left = np.clip(right - 1, 0, len(x) - 1)
    return float(np.max(np.minimum(np.abs(probes - x[left]), np.abs(probes - x[right]))))


def grid_covering_radius(points: np.ndarray, box: Box, steps: int = None) -> float:
    """
    Largest distance from a point of box to the nearest of points; exact on
    intervals, over a grid of steps per axis otherwise.

    The box is scanned twice: once in full, then shrunk by that first value,
    so a patch edge does not dominate.
    """
    steps = steps or Config.COVERING_GRID_STEPS
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise EmptySet("Covering radius of an empty point list")

    if box.dim == 1:
        measure = lambda b: _interval_covering_radius(pts[:, 0], b.lo[0], b.hi[0])
    else:
        tree = cKDTree(pts)
        measure = lambda b: float(np.max(tree.query(grid_points(b, steps))[0]))

    radius = measure(box)
    inner = box.shrunk(radius)
    if inner.is_empty or np.any(inner.widths <= 0):
        return radius
    return measure(inner)
