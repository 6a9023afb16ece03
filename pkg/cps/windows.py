"""
Windows in internal space.

A WindowUnion is a finite union of axis-aligned boxes with per-coordinate
open/closed endpoint flags. Everything the diagnostics need from a window
(volume, covariogram, difference window, character deviation) has a closed
form on boxes.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple
import logging

import numpy as np

from utils.config import Config
from cps.geometry import Box

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowBox:
    """Box with endpoint flags: lo_closed[j] / hi_closed[j] per coordinate"""
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    lo_closed: Tuple[bool, ...] = None
    hi_closed: Tuple[bool, ...] = None

    def __post_init__(self):
        object.__setattr__(self, 'lo', tuple(float(v) for v in self.lo))
        object.__setattr__(self, 'hi', tuple(float(v) for v in self.hi))
        m = len(self.lo)
        if self.lo_closed is None:
            object.__setattr__(self, 'lo_closed', (True,) * m)
        if self.hi_closed is None:
            object.__setattr__(self, 'hi_closed', (True,) * m)
        object.__setattr__(self, 'lo_closed', tuple(bool(v) for v in self.lo_closed))
        object.__setattr__(self, 'hi_closed', tuple(bool(v) for v in self.hi_closed))
        if not (len(self.hi) == len(self.lo_closed) == len(self.hi_closed) == m):
            raise ValueError("WindowBox fields differ in dimension")
        if not all(np.isfinite(self.lo)) or not all(np.isfinite(self.hi)):
            raise ValueError("Window boxes must be bounded")
        if any(h < l for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"Window box has hi < lo: {self.lo} {self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    @property
    def closure(self) -> 'WindowBox':
        return WindowBox(self.lo, self.hi)

    def as_box(self) -> Box:
        return Box(self.lo, self.hi)


@dataclass(frozen=True)
class PredicateWindow:
    """Window known only through its membership test"""
    membership: Callable[[np.ndarray], np.ndarray]
    descriptor: str

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.membership(points)


def _merge_intervals(pieces):
    """Union of 1D intervals given as (lo, hi, lo_closed, hi_closed); returns disjoint sorted list"""
    pieces = sorted(pieces, key=lambda p: (p[0], not p[2]))
    merged = []
    for lo, hi, lc, hc in pieces:
        if merged:
            plo, phi, plc, phc = merged[-1]
            touching = lo < phi or (lo == phi and (phc or lc))
            if touching:
                if hi > phi:
                    merged[-1] = (plo, hi, plc, hc)
                elif hi == phi:
                    merged[-1] = (plo, phi, plc, phc or hc)
                continue
        merged.append((lo, hi, lc, hc))
    return merged


def _normalize(boxes: Sequence[WindowBox]) -> List[WindowBox]:
    if not boxes:
        return []
    m = boxes[0].dim
    if any(b.dim != m for b in boxes):
        raise ValueError("Window boxes differ in dimension")
    if m == 1:
        merged = _merge_intervals([(b.lo[0], b.hi[0], b.lo_closed[0], b.hi_closed[0]) for b in boxes])
        return [WindowBox((lo,), (hi,), (lc,), (hc,)) for lo, hi, lc, hc in merged]

    # m == 2: slabs along the first axis, interval unions along the second
    xs = sorted({b.lo[0] for b in boxes} | {b.hi[0] for b in boxes})
    slabs = []
    for x0, x1 in zip(xs[:-1], xs[1:]):
        mid = 0.5 * (x0 + x1)
        covering = [b for b in boxes if b.lo[0] < mid < b.hi[0]]
        if not covering:
            continue
        intervals = tuple(_merge_intervals([(b.lo[1], b.hi[1], b.lo_closed[1], b.hi_closed[1]) for b in covering]))
        lc = any(b.lo[0] < x0 or b.lo_closed[0] for b in covering)
        hc = any(b.hi[0] == x1 and b.hi_closed[0] for b in covering)
        if slabs and slabs[-1][1] == x0 and slabs[-1][4] == intervals:
            slabs[-1] = (slabs[-1][0], x1, slabs[-1][2], hc, intervals)
        else:
            slabs.append((x0, x1, lc, hc, intervals))

    # degenerate boxes (zero width along the first axis) survive as-is
    degenerate = [b for b in boxes if b.lo[0] == b.hi[0]]
    result = []
    for x0, x1, lc, hc, intervals in slabs:
        for lo, hi, ilc, ihc in intervals:
            result.append(WindowBox((x0, lo), (x1, hi), (lc, ilc), (hc, ihc)))
    return result + degenerate


@dataclass(frozen=True)
class WindowUnion:
    """Finite union of boxes in R^m; normalized to interior-disjoint pieces on construction"""
    boxes: Tuple[WindowBox, ...]
    eta: float = None
    descriptor: str = ""

    def __post_init__(self):
        boxes = [b if isinstance(b, WindowBox) else WindowBox(*b) for b in self.boxes]
        object.__setattr__(self, 'boxes', tuple(_normalize(boxes)))
        if self.eta is None:
            object.__setattr__(self, 'eta', float(Config.BOUNDARY_TOLERANCE))
        if self.eta < 0:
            raise ValueError("Boundary tolerance must be nonnegative")

    @classmethod
    def interval(cls, lo: float, hi: float, lo_closed: bool = True, hi_closed: bool = True,
                 eta: float = None) -> 'WindowUnion':
        return cls((WindowBox((lo,), (hi,), (lo_closed,), (hi_closed,)),), eta=eta)

    @classmethod
    def from_pairs(cls, boxes: Sequence[Sequence[Sequence[float]]], eta: float = None) -> 'WindowUnion':
        """Closed boxes from nested [[lo, hi], ...] lists"""
        return cls(tuple(WindowBox(tuple(p[0] for p in b), tuple(p[1] for p in b)) for b in boxes), eta=eta)

    @property
    def dim(self) -> int:
        return self.boxes[0].dim if self.boxes else 0

    @property
    def is_empty(self) -> bool:
        return not self.boxes

    @property
    def closure(self) -> 'WindowUnion':
        return WindowUnion(tuple(b.closure for b in self.boxes), eta=self.eta)

    def bounding_box(self, margin: float = 0.0) -> Box:
        lo = np.min([b.lo for b in self.boxes], axis=0) - margin
        hi = np.max([b.hi for b in self.boxes], axis=0) + margin
        return Box(tuple(lo), tuple(hi))

    def _arrays(self):
        lo = np.array([b.lo for b in self.boxes], dtype=float)
        hi = np.array([b.hi for b in self.boxes], dtype=float)
        lc = np.array([b.lo_closed for b in self.boxes], dtype=bool)
        hc = np.array([b.hi_closed for b in self.boxes], dtype=bool)
        return lo, hi, lc, hc

    def contains(self, points: np.ndarray, eta: float = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Membership of each row of points.

        Returns (member, ambiguous): a point within eta of a piece boundary
        counts as a member and is flagged ambiguous.
        """
        eta = self.eta if eta is None else eta
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim if self.boxes else 1)
        member = np.zeros(len(pts), dtype=bool)
        near = np.zeros(len(pts), dtype=bool)
        interior = np.zeros(len(pts), dtype=bool)
        if not self.boxes:
            return member, near
        lo, hi, lc, hc = self._arrays()
        for i in range(len(self.boxes)):
            above = np.where(lc[i], pts >= lo[i], pts > lo[i])
            below = np.where(hc[i], pts <= hi[i], pts < hi[i])
            strict = np.all(above & below, axis=1)
            if eta > 0:
                expanded = np.all((pts >= lo[i] - eta) & (pts <= hi[i] + eta), axis=1)
            else:
                expanded = strict
            deep = np.all((pts > lo[i] + eta) & (pts < hi[i] - eta), axis=1)
            member |= strict | expanded
            near |= expanded & ~deep
            interior |= deep
        return member, near & ~interior


def volume(W: WindowUnion) -> float:
    """Lebesgue measure; endpoint flags are ignored"""
    return float(sum(b.volume for b in W.boxes))


def covariogram(W: WindowUnion, t) -> np.ndarray:
    """
    vol(W intersect (W + t)) for one shift t (shape (m,)) or many (shape (K, m)).
    """
    t_arr = np.asarray(t, dtype=float)
    single = t_arr.ndim <= 1
    shifts = t_arr.reshape(-1, W.dim)
    if W.is_empty:
        out = np.zeros(len(shifts))
        return out[0] if single else out
    lo, hi, _, _ = W._arrays()
    total = np.zeros(len(shifts))
    for i in range(len(lo)):
        for j in range(len(lo)):
            # box_i intersected with box_j + t
            overlap = np.minimum(hi[i], hi[j] + shifts) - np.maximum(lo[i], lo[j] + shifts)
            total += np.prod(np.clip(overlap, 0.0, None), axis=1)
    return float(total[0]) if single else total


def difference_window(W: WindowUnion) -> WindowUnion:
    """Closure of W - W as a box union (pairwise box differences, all endpoints closed)"""
    pieces = []
    for a in W.boxes:
        for b in W.boxes:
            lo = tuple(x - y for x, y in zip(a.lo, b.hi))
            hi = tuple(x - y for x, y in zip(a.hi, b.lo))
            pieces.append(WindowBox(lo, hi))
    return WindowUnion(tuple(pieces), eta=W.eta, descriptor=f"cl({W.descriptor} - {W.descriptor})")


def _box_ranges(W: WindowUnion, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per (frequency, box): the closed interval swept by y.w for w in the box"""
    lo, hi, _, _ = W._arrays()
    a = np.minimum(y[:, None, :] * lo[None], y[:, None, :] * hi[None]).sum(axis=2)
    b = np.maximum(y[:, None, :] * lo[None], y[:, None, :] * hi[None]).sum(axis=2)
    return a, b


def char_deviation(y, W: WindowUnion) -> np.ndarray:
    """
    sup over w in closure(W) of |exp(2 pi i y.w) - 1|, exactly.

    Accepts one frequency (shape (m,)) or many (shape (K, m)).
    """
    y_arr = np.asarray(y, dtype=float)
    single = y_arr.ndim <= 1
    ys = y_arr.reshape(-1, W.dim)
    a, b = _box_ranges(W, ys)

    # a half-integer inside [a, b] reaches the maximum 2
    half = np.ceil(a - 0.5) + 0.5
    full = (b - a >= 1.0) | (half <= b)
    edge = 2.0 * np.maximum(np.abs(np.sin(np.pi * a)), np.abs(np.sin(np.pi * b)))
    per_box = np.where(full, 2.0, edge)
    out = per_box.max(axis=1)
    return float(out[0]) if single else out


def eps_dual_member(y, W: WindowUnion, eps: float):
    """True iff char_deviation(y, W) < eps"""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return char_deviation(y, W) < eps


def eps_dual_window(W: WindowUnion, eps: float) -> PredicateWindow:
    """The dual-side window N(cl W, eps) as a membership predicate"""
    return PredicateWindow(membership=lambda ys: np.atleast_1d(eps_dual_member(np.atleast_2d(ys), W, eps)),
                           descriptor=f"N(cl {W.descriptor or 'W'}, {eps})")


def strictly_inside(W: WindowUnion, U: WindowUnion, margin: float) -> bool:
    """Every box of W sits inside some box of U with clearance greater than margin"""
    for w in W.boxes:
        ok = False
        for u in U.boxes:
            if all(wl - ul > margin for wl, ul in zip(w.lo, u.lo)) and \
                    all(uh - wh > margin for wh, uh in zip(w.hi, u.hi)):
                ok = True
                break
        if not ok:
            return False
    return True
