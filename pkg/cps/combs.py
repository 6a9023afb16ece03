"""
Model-set patches and weighted Dirac combs supported on them.
"""
from __future__ import annotations
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple
import logging

import numpy as np
from scipy.spatial import cKDTree

from utils.config import Config
from cps.errors import CertificationFailure, MarginError, TooFewPoints, UnknownKind
from cps.geometry import Box, grid_covering_radius
from cps.scheme import SchemeBasis, embed_many, enumerate_lattice
from cps.windows import WindowBox, WindowUnion, strictly_inside

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PointSetPatch:
    """Finite piece of Lambda(W) inside a physical region; points in lexicographic order"""
    scheme: SchemeBasis
    window: WindowUnion
    region: Box
    points: np.ndarray
    boundary_ambiguous_count: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, self.scheme.n)
        pts.setflags(write=False)
        object.__setattr__(self, 'points', pts)
        phys, internal = embed_many(self.scheme, pts)
        object.__setattr__(self, '_physical', phys)
        object.__setattr__(self, '_internal', internal)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def physical(self) -> np.ndarray:
        return self._physical

    @property
    def internal(self) -> np.ndarray:
        return self._internal

    def keys(self):
        return [tuple(int(v) for v in z) for z in self.points]


@dataclass(frozen=True)
class InternalWeight:
    """
    Internal weight function g, evaluated at star(p).

    kinds: indicator, tent(center, halfwidth), complex_phase(theta),
    trapezoid(plateau boxes, support boxes) and custom(func).
    """
    kind: str
    center: Tuple[float, ...] = ()
    halfwidth: Tuple[float, ...] = ()
    theta: Tuple[float, ...] = ()
    plateaus: Tuple[WindowBox, ...] = ()
    supports: Tuple[WindowBox, ...] = ()
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in ('indicator', 'tent', 'complex_phase', 'trapezoid', 'custom'):
            raise UnknownKind(f"Unknown internal weight kind: {self.kind}")

    @classmethod
    def indicator(cls) -> 'InternalWeight':
        return cls('indicator')

    @classmethod
    def tent(cls, center, halfwidth) -> 'InternalWeight':
        return cls('tent', center=tuple(np.atleast_1d(center).astype(float)),
                   halfwidth=tuple(np.atleast_1d(halfwidth).astype(float)))

    @classmethod
    def complex_phase(cls, theta) -> 'InternalWeight':
        return cls('complex_phase', theta=tuple(np.atleast_1d(theta).astype(float)))

    @property
    def descriptor(self) -> str:
        if self.kind == 'tent':
            return f"tent({self.center}, {self.halfwidth})"
        if self.kind == 'complex_phase':
            return f"complex_phase({self.theta})"
        return self.kind

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.kind == 'indicator':
            return np.ones(len(u), dtype=complex)
        if self.kind == 'tent':
            c = np.asarray(self.center)
            h = np.asarray(self.halfwidth)
            return np.prod(np.clip(1.0 - np.abs(u - c) / h, 0.0, None), axis=1).astype(complex)
        if self.kind == 'complex_phase':
            return np.exp(2j * np.pi * (u @ np.asarray(self.theta)))
        if self.kind == 'trapezoid':
            return trapezoid_profile(u, self.plateaus, self.supports).astype(complex)
        return np.asarray(self.func(u), dtype=complex)


def trapezoid_profile(u: np.ndarray, plateaus, supports) -> np.ndarray:
    """
    Max over (plateau, support) pairs of the per-coordinate trapezoid:
    1 on the plateau, linear to 0 at the support boundary.
    """
    value = np.zeros(len(u))
    for p, s in zip(plateaus, supports):
        p_lo, p_hi = np.asarray(p.lo), np.asarray(p.hi)
        s_lo, s_hi = np.asarray(s.lo), np.asarray(s.hi)
        rise = np.clip((u - s_lo) / np.maximum(p_lo - s_lo, 1e-300), 0.0, 1.0)
        fall = np.clip((s_hi - u) / np.maximum(s_hi - p_hi, 1e-300), 0.0, 1.0)
        value = np.maximum(value, np.prod(np.minimum(rise, fall), axis=1))
    return value


@dataclass(frozen=True, eq=False)
class WeightedComb:
    """omega = sum of weights[i] * delta at patch.points[i]"""
    patch: PointSetPatch
    weights: np.ndarray
    weight_model: str = "unit"
    bound: float = None
    internal_weight: Optional[InternalWeight] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex).reshape(-1)
        if len(w) != len(self.patch):
            raise ValueError(f"{len(w)} weights for {len(self.patch)} points")
        if not np.all(np.isfinite(w)):
            raise ValueError("Comb weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, 'weights', w)
        magnitude = float(np.max(np.abs(w))) if len(w) else 0.0
        if self.bound is None:
            object.__setattr__(self, 'bound', magnitude)
        elif magnitude > self.bound + 1e-12:
            raise ValueError(f"Weight magnitude {magnitude} exceeds stated bound {self.bound}")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def scheme(self) -> SchemeBasis:
        return self.patch.scheme

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.weights.imag == 0))

    @property
    def is_nonnegative(self) -> bool:
        return self.is_real and bool(np.all(self.weights.real >= 0))


@dataclass
class DeloneRadii:
    packing: float
    covering: float


@dataclass
class SupportReport:
    violations: int
    checked: int
    min_boundary_distance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def model_set(scheme: SchemeBasis, W: WindowUnion, region: Box, eta: float = None,
              budget: int = None) -> PointSetPatch:
    """Lambda(W) inside region, with eta-tolerant window membership"""
    eta = W.eta if eta is None else eta
    if W.is_empty:
        return PointSetPatch(scheme, W, region, np.zeros((0, scheme.n), dtype=np.int64))
    points = enumerate_lattice(scheme, region, W.bounding_box(margin=eta), budget=budget)
    _, internal = embed_many(scheme, points)
    member, ambiguous = W.contains(internal, eta=eta)
    ambiguous_count = int(np.count_nonzero(member & ambiguous))
    if ambiguous_count:
        logger.warning(f"{ambiguous_count} points of '{scheme.name}' lie within {eta} of the window boundary")
    patch = PointSetPatch(scheme, W, region, points[member], ambiguous_count)
    logger.info(f"Model set on '{scheme.name}' in {region}: {len(patch)} points")
    return patch


def delone_radii(patch: PointSetPatch) -> DeloneRadii:
    """Packing radius (half the minimal distance) and grid covering radius over the region"""
    if len(patch) < 2:
        raise TooFewPoints(f"Delone radii need at least 2 points, got {len(patch)}")
    tree = cKDTree(patch.physical)
    nearest, _ = tree.query(patch.physical, k=2)
    packing = float(nearest[:, 1].min()) / 2.0
    covering = grid_covering_radius(patch.physical, patch.region)
    return DeloneRadii(packing=packing, covering=covering)


def meyer_defect(patch: PointSetPatch) -> float:
    """
    Minimal distance between distinct elements of the difference set of the
    central half-region, differences formed on integer coordinates.
    """
    central = patch.region.scaled(0.5)
    inside = central.contains(patch.physical)
    pts = patch.points[inside]
    if len(pts) < 2:
        raise TooFewPoints(f"Meyer defect needs at least 2 central points, got {len(pts)}")
    diffs = (pts[:, None, :] - pts[None, :, :]).reshape(-1, patch.scheme.n)
    diffs = np.unique(diffs, axis=0)
    phys, _ = embed_many(patch.scheme, diffs)
    nearest, _ = cKDTree(phys).query(phys, k=2)
    return float(nearest[:, 1].min())


def covering_growth(scheme: SchemeBasis, W: WindowUnion, region: Box) -> Tuple[float, float]:
    """Covering radius on region and on the doubled region; blow-up flags an empty-interior window"""
    radii = []
    for box in (region, region.scaled(2.0)):
        patch = model_set(scheme, W, box)
        if len(patch) == 0:
            radii.append(float('inf'))
        else:
            radii.append(grid_covering_radius(patch.physical, box))
    return radii[0], radii[1]


def unit_comb(patch: PointSetPatch) -> WeightedComb:
    return WeightedComb(patch, np.ones(len(patch)), weight_model="unit", bound=1.0)


def comb_from_internal_weight(patch: PointSetPatch, g: InternalWeight) -> WeightedComb:
    """Weight at p is g(star(p))"""
    weights = g(patch.internal) if len(patch) else np.zeros(0, dtype=complex)
    return WeightedComb(patch, weights, weight_model=f"internal_function({g.descriptor})", internal_weight=g)


def comb_bernoulli(patch: PointSetPatch, p: float, seed: int) -> WeightedComb:
    """
    i.i.d. {0, 1} weights with P(1) = p.

    Point i takes the i-th raw 64-bit output r of PCG64(seed) and is kept
    when (r >> 11) * 2**-53 < p. Only the bit generator is involved, so the
    weights do not move with Generator's sampling routines.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Bernoulli probability must be in [0, 1], got {p}")
    raw = np.random.PCG64(seed).random_raw(len(patch)).astype(np.uint64)
    uniform = (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    weights = (uniform < p).astype(float)
    return WeightedComb(patch, weights, weight_model=f"bernoulli({p}, {seed})", bound=1.0)


def conjugate(c: WeightedComb) -> WeightedComb:
    return replace(c, weights=np.conj(c.weights), weight_model=f"conj({c.weight_model})", internal_weight=None)


def re_part(c: WeightedComb) -> WeightedComb:
    return replace(c, weights=c.weights.real.astype(complex), weight_model=f"re({c.weight_model})", internal_weight=None)


def im_part(c: WeightedComb) -> WeightedComb:
    return replace(c, weights=c.weights.imag.astype(complex), weight_model=f"im({c.weight_model})", internal_weight=None)


def translation_bound(c: WeightedComb, K_halfwidth: float, stride: float) -> float:
    """
    Empirical C_K: max over translates t on a stride grid of the total
    weight magnitude in the box t + [-K, K]^d.
    """
    if len(c) == 0:
        return 0.0
    region = c.patch.region
    inner = region.shrunk(K_halfwidth)
    if inner.is_empty:
        raise ValueError(f"K box of halfwidth {K_halfwidth} does not fit in region {region}")
    axes = [lo + stride * np.arange(int(np.floor((hi - lo) / stride + 1e-9)) + 1)
            for lo, hi in zip(inner.lo, inner.hi)]
    phys = c.patch.physical
    mags = np.abs(c.weights)
    tol = 1e-9

    if c.scheme.d == 1:
        order = np.argsort(phys[:, 0], kind='stable')
        x = phys[order, 0]
        cumulative = np.concatenate([[0.0], np.cumsum(mags[order])])
        t = axes[0]
        left = np.searchsorted(x, t - K_halfwidth - tol, side='left')
        right = np.searchsorted(x, t + K_halfwidth + tol, side='right')
        return float(np.max(cumulative[right] - cumulative[left]))

    best = 0.0
    for tx in axes[0]:
        column = np.abs(phys[:, 0] - tx) <= K_halfwidth + tol
        if not np.any(column):
            continue
        ys = phys[column, 1]
        ms = mags[column]
        for ty in axes[1]:
            best = max(best, float(ms[np.abs(ys - ty) <= K_halfwidth + tol].sum()))
    return best


def dominating_comb(patch: PointSetPatch, U: WindowUnion) -> WeightedComb:
    """
    Internal-function comb on Lambda(U) dominating the unit comb of the
    Lambda(W) patch: g is a trapezoid equal to 1 on W and 0 outside U.

    Raises:
        MarginError: If U does not strictly contain W.
        CertificationFailure: If some patch point is not dominated.
    """
    W = patch.window
    margin = 2.0 * max(W.eta, U.eta)
    if not strictly_inside(W, U, margin):
        raise MarginError(f"Window {U.descriptor or U.boxes} does not strictly contain {W.descriptor or W.boxes}")

    plateaus, supports = [], []
    for w in W.boxes:
        host = next(u for u in U.boxes if all(wl - ul > margin for wl, ul in zip(w.lo, u.lo))
                    and all(uh - wh > margin for wh, uh in zip(w.hi, u.hi)))
        plateaus.append(WindowBox(tuple(np.asarray(w.lo) - W.eta), tuple(np.asarray(w.hi) + W.eta)))
        supports.append(host.closure)
    g = InternalWeight('trapezoid', plateaus=tuple(plateaus), supports=tuple(supports))

    outer = model_set(patch.scheme, U, patch.region)
    comb = WeightedComb(outer, g(outer.internal), weight_model="dominating(trapezoid)", internal_weight=g)

    index = {key: i for i, key in enumerate(outer.keys())}
    missing = [key for key in patch.keys() if key not in index]
    if missing:
        raise CertificationFailure(f"{len(missing)} points of Lambda(W) missing from Lambda(U), e.g. {missing[0]}")
    dominated = np.array([comb.weights[index[key]].real for key in patch.keys()])
    if len(dominated) and dominated.min() < 1.0 - 1e-12:
        raise CertificationFailure(f"Domination fails: minimal weight {dominated.min()} on Lambda(W)")
    logger.info(f"Dominating comb on {len(outer)} points covers all {len(patch)} points of Lambda(W)")
    return comb


def comb_support_check(c: WeightedComb, W: WindowUnion) -> SupportReport:
    """Every point carrying nonzero weight has its star inside W (eta-tolerant)"""
    active = c.weights != 0
    internal = c.patch.internal[active]
    member, _ = W.contains(internal)
    distance = _boundary_distance(internal, W)
    return SupportReport(violations=int(np.count_nonzero(~member)), checked=int(active.sum()),
                         min_boundary_distance=distance)


def _boundary_distance(points: np.ndarray, W: WindowUnion) -> float:
    """Smallest distance of the given (inside) points to the outer boundary of W"""
    if len(points) == 0 or W.is_empty:
        return float('inf')
    lo, hi, _, _ = W._arrays()
    depth = np.full(len(points), -np.inf)
    for i in range(len(lo)):
        inside = np.minimum(points - lo[i], hi[i] - points).min(axis=1)
        depth = np.maximum(depth, inside)
    return float(np.min(np.abs(depth)))
