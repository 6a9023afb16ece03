"""
Finite-volume autocorrelation of weighted combs and its Eberlein splitting.

Coefficient maps are keyed by exact difference vectors (integer lattice
coordinates for combs on a scheme, exact rationals for the hand-built
fixtures), so support checks and translation defects never compare floats
for identity.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging
import time

import numpy as np
from scipy import integrate

from utils.config import Config
from cps.combs import InternalWeight, SupportReport, WeightedComb, _boundary_distance
from cps.errors import RegionTooSmall, SumMismatch, UnknownKind
from cps.geometry import Box
from cps.scheme import SchemeBasis, density, embed_many, enumerate_lattice, physical_many, star_many
from cps.windows import WindowUnion, covariogram, difference_window

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class CoefficientMap:
    """
    Discrete measure sum values[k] * delta at positions[k].

    keys are exact (int64 rows, or object rows of Fractions); locate maps
    an array of keys to physical positions.
    """
    keys: np.ndarray
    values: np.ndarray
    locate: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    _index: Optional[Dict[tuple, int]] = field(default=None, init=False, repr=False)
    _positions: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        if len(self.keys) != len(self.values):
            raise ValueError(f"{len(self.keys)} keys for {len(self.values)} values")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def positions(self) -> np.ndarray:
        if self._positions is None:
            if len(self.keys):
                self._positions = np.asarray(self.locate(self.keys), dtype=float).reshape(len(self.keys), -1)
            else:
                self._positions = np.zeros((0, 1))
        return self._positions

    @property
    def index(self) -> Dict[tuple, int]:
        if self._index is None:
            self._index = {tuple(k): i for i, k in enumerate(self.keys)}
        return self._index

    def get(self, key) -> complex:
        i = self.index.get(tuple(key))
        return complex(self.values[i]) if i is not None else 0j

    def lookup(self, keys) -> np.ndarray:
        """Values at the given keys, 0 where a key is absent"""
        index = self.index
        out = np.zeros(len(keys), dtype=complex)
        for n, key in enumerate(keys):
            i = index.get(tuple(key))
            if i is not None:
                out[n] = self.values[i]
        return out

    def within(self, radius: float) -> np.ndarray:
        if not len(self):
            return np.zeros(0, dtype=bool)
        return np.max(np.abs(self.positions), axis=1) <= radius + 1e-9

    def replace_values(self, values: np.ndarray, label: str = None) -> 'CoefficientMap':
        return CoefficientMap(self.keys, values, self.locate, label or self.label)


def lattice_map(scheme: SchemeBasis, keys: np.ndarray, values: np.ndarray, label: str = "") -> CoefficientMap:
    return CoefficientMap(np.asarray(keys, dtype=np.int64).reshape(-1, scheme.n), values,
                          lambda k: physical_many(scheme, k), label)


@dataclass(frozen=True)
class VanHoveSequence:
    """Centered boxes A_n = [-R_n, R_n]^d"""
    d: int
    radii: Tuple[float, ...]

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, 'radii', radii)
        if len(radii) < 3:
            raise ValueError(f"A van Hove sequence needs at least 3 radii, got {len(radii)}")
        if radii[0] <= 0 or any(b <= a for a, b in zip(radii[:-1], radii[1:])):
            raise ValueError(f"van Hove radii must be positive and strictly increasing: {radii}")

    @classmethod
    def geometric(cls, start: float, count: int, d: int = 1, ratio: float = None) -> 'VanHoveSequence':
        ratio = ratio or Config.VAN_HOVE_RATIO
        return cls(d, tuple(start * ratio ** n for n in range(count)))

    @property
    def volumes(self) -> Tuple[float, ...]:
        return tuple((2.0 * r) ** self.d for r in self.radii)


@dataclass(eq=False)
class Autocorrelation:
    """gamma_R: coefficients over ordered pairs inside A_R, divided by Vol(A_R)"""
    R: float
    volume: float
    coefficients: CoefficientMap
    scheme: SchemeBasis
    window: WindowUnion
    comb_ref: str
    max_lag: Optional[float] = None

    @property
    def reach(self) -> float:
        """Largest physical lag represented by the keys"""
        return self.max_lag if self.max_lag is not None else 2.0 * self.R


@dataclass
class OracleKind:
    """How gamma_S is produced: full_modelset, internal_function(g) or bernoulli(p)"""
    name: str
    g: Optional[InternalWeight] = None
    p: Optional[float] = None

    def __post_init__(self):
        if self.name not in ('full_modelset', 'internal_function', 'bernoulli'):
            raise UnknownKind(f"Unknown oracle kind: {self.name}")
        if self.name == 'internal_function' and self.g is None:
            raise UnknownKind("internal_function oracle needs a weight function g")
        if self.name == 'bernoulli' and self.p is None:
            raise UnknownKind("bernoulli oracle needs a probability p")

    @classmethod
    def full_modelset(cls) -> 'OracleKind':
        return cls('full_modelset')

    @classmethod
    def internal_function(cls, g: InternalWeight) -> 'OracleKind':
        return cls('internal_function', g=g)

    @classmethod
    def bernoulli(cls, p: float) -> 'OracleKind':
        return cls('bernoulli', p=p)

    @property
    def descriptor(self) -> str:
        if self.name == 'internal_function':
            return f"internal_function({self.g.descriptor})"
        if self.name == 'bernoulli':
            return f"bernoulli({self.p})"
        return self.name


@dataclass(eq=False)
class Decomposition:
    """gamma = gamma_S + gamma_0 on a common key set"""
    gamma: CoefficientMap
    gamma_S: CoefficientMap
    gamma_0: CoefficientMap
    oracle: str
    boundary_corrected: bool
    R: float


@dataclass
class UniquenessResult:
    accepted: bool
    defects: List[float]
    null_means: List[float]
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def box_overlap_fraction(positions: np.ndarray, R: float) -> np.ndarray:
    """vol(A_R intersect (A_R - x)) / vol(A_R) for each row x"""
    pos = np.atleast_2d(positions)
    return np.prod(np.clip(1.0 - np.abs(pos) / (2.0 * R), 0.0, None), axis=1)


def _pair_block(Z, X, w, offsets, mult, rows, lag):
    zr, xr, wr = Z[rows], X[rows], w[rows]
    if lag is not None:
        lo = xr.min(axis=0) - lag - 1e-9
        hi = xr.max(axis=0) + lag + 1e-9
        cols = np.flatnonzero(np.all((X >= lo) & (X <= hi), axis=1))
    else:
        cols = np.arange(len(Z))
    codes = ((zr[:, None, :] - Z[None, cols, :] + offsets) * mult).sum(axis=2)
    prods = wr[:, None] * np.conj(w[None, cols])
    if lag is not None:
        near = np.all(np.abs(xr[:, None, :] - X[None, cols, :]) <= lag + 1e-9, axis=2)
        codes, prods = codes[near], prods[near]
    codes, prods = codes.ravel(), prods.ravel()
    unique, inverse = np.unique(codes, return_inverse=True)
    re = np.bincount(inverse, weights=prods.real, minlength=len(unique))
    im = np.bincount(inverse, weights=prods.imag, minlength=len(unique))
    return unique, re, im


def autocorrelation(c: WeightedComb, R: float, max_lag: float = None, threads: int = None) -> Autocorrelation:
    """
    gamma_R(z) = (1/Vol(A_R)) * sum over ordered pairs (x, y) in A_R with
    integer difference z of omega(x) * conj(omega(y)).

    Pairs are visited row block by row block in lexicographic (x, y) order
    and merged in block order, so the result does not depend on threads.

    Raises:
        RegionTooSmall: If A_R is not inside the comb region.
    """
    scheme = c.scheme
    box = Box.centered(R, scheme.d)
    if not c.patch.region.covers(box):
        raise RegionTooSmall(f"A_R with R={R} is not inside comb region {c.patch.region}")

    start = time.time()
    inside = box.contains(c.patch.physical) & (c.weights != 0)
    Z = c.patch.points[inside]
    X = c.patch.physical[inside]
    w = c.weights[inside]
    volume = (2.0 * R) ** scheme.d
    locate = lambda k: physical_many(scheme, k)

    if len(Z) == 0:
        empty = CoefficientMap(np.zeros((0, scheme.n), dtype=np.int64), np.zeros(0), locate, "gamma_R")
        return Autocorrelation(R, volume, empty, scheme, c.patch.window, c.weight_model, max_lag)

    span = (Z.max(axis=0) - Z.min(axis=0)).astype(np.int64)
    radix = 2 * span + 1
    if np.prod(radix.astype(float)) >= 2.0 ** 62:
        raise ValueError("Difference keys do not fit a 64-bit code; reduce R")
    mult = np.ones(scheme.n, dtype=np.int64)
    for j in range(scheme.n - 2, -1, -1):
        mult[j] = mult[j + 1] * radix[j + 1]

    block = max(1, int(Config.AUTOCORR_BLOCK_ROWS))
    blocks = [slice(s, min(len(Z), s + block)) for s in range(0, len(Z), block)]
    workers = threads or Config.MAX_WORKERS
    task = lambda rows: _pair_block(Z, X, w, span, mult, rows, max_lag)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, blocks))
    else:
        parts = [task(rows) for rows in blocks]

    if len(parts) == 1:
        codes, re, im = parts[0]
    else:
        all_codes = np.concatenate([p[0] for p in parts])
        codes, inverse = np.unique(all_codes, return_inverse=True)
        re = np.bincount(inverse, weights=np.concatenate([p[1] for p in parts]), minlength=len(codes))
        im = np.bincount(inverse, weights=np.concatenate([p[2] for p in parts]), minlength=len(codes))

    keys = np.stack(np.unravel_index(codes, tuple(int(r) for r in radix)), axis=1).astype(np.int64) - span
    values = (re + 1j * im) / volume
    coefficients = CoefficientMap(keys, values, locate, "gamma_R")
    logger.info(f"Autocorrelation of {len(Z)} points at R={R}: {len(keys)} keys "
                f"in {time.time() - start:.2f}s")
    return Autocorrelation(R, volume, coefficients, scheme, c.patch.window, c.weight_model, max_lag)


def support_check(gamma: Autocorrelation, scheme: SchemeBasis, W: WindowUnion) -> SupportReport:
    """Every key with nonzero coefficient has its star inside cl(W - W)"""
    coeffs = gamma.coefficients
    active = coeffs.values != 0
    stars = star_many(scheme, coeffs.keys[active])
    diff = difference_window(W)
    member, _ = diff.contains(stars)
    violations = int(np.count_nonzero(~member))
    if violations:
        logger.warning(f"{violations} autocorrelation keys fall outside the difference window")
    return SupportReport(violations=violations, checked=int(active.sum()),
                         min_boundary_distance=_boundary_distance(stars[member], diff))


def _profile_factor(l: float, h: float, s: float, profile: Callable[[float], float],
                    breaks: Sequence[float]) -> float:
    """
    Integral over [l, h] of profile(u + s) * profile(u) for a piecewise
    linear profile; Simpson is exact on each quadratic piece.
    """
    if h <= l:
        return 0.0
    f = lambda u: profile(u + s) * profile(u)
    knots = {l, h}
    for b in breaks:
        for shift in (0.0, s):
            k = b - shift
            if l < k < h:
                knots.add(k)
    knots = sorted(knots)
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        total += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    return total


def _coordinate_profiles(g: InternalWeight):
    """Per-coordinate (profile, breakpoints) when g is a product of piecewise linear factors"""
    if g.kind == 'tent':
        return [(lambda u, c=c, hw=hw: max(0.0, 1.0 - abs(u - c) / hw), (c - hw, c, c + hw))
                for c, hw in zip(g.center, g.halfwidth)]
    if g.kind == 'trapezoid' and len(g.plateaus) == 1:
        p, s = g.plateaus[0], g.supports[0]
        profiles = []
        for slo, plo, phi, shi in zip(s.lo, p.lo, p.hi, s.hi):
            profile = lambda u, slo=slo, plo=plo, phi=phi, shi=shi: min(
                1.0, max(0.0, min((u - slo) / max(plo - slo, 1e-300), (shi - u) / max(shi - phi, 1e-300))))
            profiles.append((profile, (slo, plo, phi, shi)))
        return profiles
    return None


def _overlap_pieces(W: WindowUnion, s: np.ndarray):
    """Boxes B_i intersected with B_j - s, as (lo, hi) arrays"""
    lo, hi, _, _ = W._arrays()
    for i in range(len(lo)):
        for j in range(len(lo)):
            plo = np.maximum(lo[i], lo[j] - s)
            phi = np.minimum(hi[i], hi[j] - s)
            if np.all(phi > plo):
                yield plo, phi


def _numeric_overlap(g: InternalWeight, W: WindowUnion, s: np.ndarray) -> complex:
    total = 0j
    for plo, phi in _overlap_pieces(W, s):
        if W.dim == 1:
            f = lambda u: g(np.array([[u + s[0]]]))[0] * np.conj(g(np.array([[u]]))[0])
            re, _ = integrate.quad(lambda u: f(u).real, plo[0], phi[0], epsabs=1e-11, limit=200)
            im, _ = integrate.quad(lambda u: f(u).imag, plo[0], phi[0], epsabs=1e-11, limit=200)
        else:
            f = lambda v, u: g(np.array([[u + s[0], v + s[1]]]))[0] * np.conj(g(np.array([[u, v]]))[0])
            re, _ = integrate.dblquad(lambda v, u: f(v, u).real, plo[0], phi[0], plo[1], phi[1], epsabs=1e-10)
            im, _ = integrate.dblquad(lambda v, u: f(v, u).imag, plo[0], phi[0], plo[1], phi[1], epsabs=1e-10)
        total += complex(re, im)
    return total


def _internal_overlap(g: InternalWeight, W: WindowUnion, s: np.ndarray) -> complex:
    """Integral of g(u + s) * conj(g(u)) over u in W with u + s in W"""
    if g.kind == 'indicator':
        return complex(covariogram(W, s))
    if g.kind == 'complex_phase':
        return complex(covariogram(W, s)) * np.exp(2j * np.pi * float(np.dot(g.theta, s)))
    profiles = _coordinate_profiles(g)
    if profiles is None:
        return _numeric_overlap(g, W, s)
    total = 0.0
    for plo, phi in _overlap_pieces(W, s):
        factor = 1.0
        for k, (profile, breaks) in enumerate(profiles):
            factor *= _profile_factor(plo[k], phi[k], s[k], profile, breaks)
        total += factor
    return complex(total)


def gamma_S_oracle(kind: OracleKind, scheme: SchemeBasis, W: WindowUnion, z) -> complex:
    """Infinite-volume strongly almost periodic coefficient at the integer vector z"""
    return complex(gamma_S_oracle_many(kind, scheme, W, np.atleast_2d(z))[0])


def gamma_S_oracle_many(kind: OracleKind, scheme: SchemeBasis, W: WindowUnion, Z: np.ndarray) -> np.ndarray:
    if not isinstance(kind, OracleKind):
        raise UnknownKind(f"Unknown oracle kind: {kind!r}")
    stars = star_many(scheme, Z)
    dens = density(scheme)
    if kind.name == 'full_modelset':
        return dens * covariogram(W, stars).astype(complex)
    if kind.name == 'bernoulli':
        return kind.p ** 2 * dens * covariogram(W, stars).astype(complex)
    values = np.zeros(len(stars), dtype=complex)
    diff = difference_window(W)
    reachable, _ = diff.contains(stars, eta=0.0)
    for i in np.flatnonzero(reachable):
        values[i] = dens * _internal_overlap(kind.g, W, stars[i])
    return values


def sap_coefficients(kind: OracleKind, scheme: SchemeBasis, W: WindowUnion, radius: float) -> CoefficientMap:
    """Oracle coefficients on every point of Lambda(cl(W - W)) within [-radius, radius]^d"""
    diff = difference_window(W)
    keys = enumerate_lattice(scheme, Box.centered(radius, scheme.d), diff.bounding_box(margin=W.eta))
    member, _ = diff.contains(star_many(scheme, keys))
    keys = keys[member]
    return lattice_map(scheme, keys, gamma_S_oracle_many(kind, scheme, W, keys), f"gamma_S[{kind.descriptor}]")


def decompose(gamma: Autocorrelation, kind: OracleKind, boundary_correction: bool = True) -> Decomposition:
    """
    Split gamma into the oracle's strongly almost periodic part and the rest.

    With boundary_correction, gamma_R is first divided by the box-overlap
    fraction vol(A_R intersect (A_R - x))/vol(A_R) that restricting both
    factors to A_R introduces; the split is then exact on that corrected map.
    Without it the split is of gamma_R itself.
    """
    scheme, W = gamma.scheme, gamma.window
    sap = sap_coefficients(kind, scheme, W, gamma.reach)
    keys = np.unique(np.concatenate([gamma.coefficients.keys, sap.keys]).reshape(-1, scheme.n), axis=0)
    base = lattice_map(scheme, keys, np.zeros(len(keys)))
    positions = base.positions

    raw = gamma.coefficients.lookup(keys)
    if boundary_correction:
        fraction = box_overlap_fraction(positions, gamma.R)
        raw = np.where(fraction > 0, raw / np.where(fraction > 0, fraction, 1.0), 0.0)
    smooth = sap.lookup(keys)
    null = raw - smooth

    total = null + smooth
    mismatch = float(np.max(np.abs(total - raw))) if len(keys) else 0.0
    if mismatch > 1e-12:
        raise SumMismatch(f"Decomposition does not add up: {mismatch}")
    return Decomposition(gamma=base.replace_values(raw, "gamma"),
                         gamma_S=base.replace_values(smooth, "gamma_S"),
                         gamma_0=base.replace_values(null, "gamma_0"),
                         oracle=kind.descriptor, boundary_corrected=boundary_correction, R=gamma.R)


def null_mean(coeffs: CoefficientMap, seq: VanHoveSequence) -> List[float]:
    """|coeffs|(A_n) / Vol(A_n) along the sequence"""
    values = np.abs(coeffs.values)
    out = []
    for radius, vol in zip(seq.radii, seq.volumes):
        mask = coeffs.within(radius)
        out.append(float(values[mask].sum()) / vol if len(values) else 0.0)
    return out


def oracle_split(c: WeightedComb, kind: OracleKind) -> Tuple[WeightedComb, Optional[WeightedComb]]:
    """
    omega = omega_S + omega_0 at the level of weights. A bernoulli(p) comb
    splits into p on every patch point and the centred fluctuation; every
    other kind is its own mean and has no fluctuation.
    """
    if kind.name != 'bernoulli':
        return c, None
    mean = np.full(len(c), kind.p, dtype=complex)
    return (replace(c, weights=mean, weight_model=f"mean({c.weight_model})", bound=kind.p,
                    internal_weight=None),
            replace(c, weights=c.weights - mean, weight_model=f"centred({c.weight_model})",
                    bound=max(kind.p, 1.0 - kind.p), internal_weight=None))


def _split_autocorrelation(c: WeightedComb, kind: OracleKind, radius: float, threads: int = None) -> Autocorrelation:
    """gamma_R of omega_S plus gamma_R of omega_0, without their cross-correlation"""
    mean, fluctuation = oracle_split(c, kind)
    gamma = autocorrelation(mean, radius, max_lag=radius, threads=threads)
    if fluctuation is None:
        return gamma
    centred = autocorrelation(fluctuation, radius, max_lag=radius, threads=threads).coefficients
    keys = np.unique(np.concatenate([gamma.coefficients.keys, centred.keys]).reshape(-1, c.scheme.n), axis=0)
    values = gamma.coefficients.lookup(keys) + centred.lookup(keys)
    return replace(gamma, coefficients=lattice_map(c.scheme, keys, values, "gamma_R"), comb_ref=c.weight_model)


def finite_volume_null_means(c: WeightedComb, kind: OracleKind, seq: VanHoveSequence,
                             threads: int = None) -> List[float]:
    """
    |gamma_0|(A_n)/Vol(A_n) where gamma_0 comes from the decomposition of
    the finite-volume autocorrelation at R_n, lags limited to R_n.

    The comb is first split with oracle_split and the cross-correlation of
    its two parts is left out. That term has zero mean and a vanishing null
    mean, but it varies slowly along the internal coordinate of the lag, so
    at finite R it swamps the pair noise that otherwise averages out.
    """
    out = []
    for radius in seq.radii:
        parts = decompose(_split_autocorrelation(c, kind, radius, threads), kind)
        mask = parts.gamma_0.within(radius)
        total = float(np.abs(parts.gamma_0.values[mask]).sum()) if mask.any() else 0.0
        out.append(total / (2.0 * radius) ** seq.d)
        logger.debug(f"Null mean at R={radius}: {out[-1]:.6g}")
    return out


def norm_ap_defect(coeffs: CoefficientMap, t, patch_radius: float) -> float:
    """
    sup |c(z) - c(z - t)| over z in the support or its shift by t, keeping
    a margin of |t| from the edge of the patch.
    """
    t_key = np.asarray(t, dtype=coeffs.keys.dtype).reshape(-1)
    t_len = float(np.max(np.abs(coeffs.locate(t_key.reshape(1, -1))))) if len(coeffs) else 0.0
    limit = patch_radius - t_len
    if limit < 0 or not len(coeffs):
        return 0.0
    support = coeffs.keys[coeffs.values != 0]
    candidates = np.concatenate([support, support + t_key]) if len(support) else support
    if not len(candidates):
        return 0.0
    positions = np.asarray(coeffs.locate(candidates), dtype=float).reshape(len(candidates), -1)
    inner = np.max(np.abs(positions), axis=1) <= limit + 1e-9
    candidates = candidates[inner]
    if not len(candidates):
        return 0.0
    here = coeffs.lookup(candidates)
    there = coeffs.lookup(candidates - t_key)
    return float(np.max(np.abs(here - there)))


def almost_period_candidates(scheme: SchemeBasis, delta: float = None, radius: float = None,
                             count: int = None) -> np.ndarray:
    """Nonzero lattice vectors with |star| <= delta, shortest physical part first"""
    delta = delta or Config.ALMOST_PERIOD_DELTA
    count = count or Config.ALMOST_PERIOD_COUNT
    radius = radius or 10.0 * count / (density(scheme) * (2.0 * delta) ** scheme.m)
    keys = enumerate_lattice(scheme, Box.centered(radius, scheme.d), Box.centered(delta, scheme.m))
    keys = keys[np.any(keys != 0, axis=1)]
    lengths = np.max(np.abs(physical_many(scheme, keys)), axis=1)
    order = np.lexsort((np.arange(len(keys)), lengths))
    return keys[order][:count]


def _period_length(coeffs: CoefficientMap, t) -> float:
    key = np.asarray(t, dtype=coeffs.keys.dtype).reshape(1, -1)
    return float(np.max(np.abs(np.asarray(coeffs.locate(key), dtype=float))))


def _is_decreasing(values: Sequence[float], slack: float = 0.05) -> bool:
    return all(b <= a * (1.0 + slack) + 1e-15 for a, b in zip(values[:-1], values[1:]))


def uniqueness_check(mu: CoefficientMap, candidate_S: CoefficientMap, candidate_0: CoefficientMap,
                     seq: VanHoveSequence, periods: np.ndarray, patch_radius: float,
                     ap_tolerance: float = None, null_tolerance: float = None) -> UniquenessResult:
    """
    Accept (candidate_S, candidate_0) as the Eberlein pair of mu when the
    first passes the norm almost periodicity screen on at least three
    candidate periods and the null mean of the second decreases below
    tolerance, or already sits below it on every scale. Periods longer
    than the patch are skipped.

    Raises:
        SumMismatch: If candidate_S + candidate_0 differs from mu.
    """
    ap_tolerance = ap_tolerance or Config.NORM_AP_TOLERANCE
    null_tolerance = null_tolerance or Config.NULL_MEAN_TOLERANCE

    keys = list({tuple(k) for part in (mu, candidate_S, candidate_0) for k in part.keys})
    mismatch = np.abs(mu.lookup(keys) - candidate_S.lookup(keys) - candidate_0.lookup(keys))
    if len(keys) and mismatch.max() > 1e-12:
        raise SumMismatch(f"Candidate pair misses mu by {mismatch.max()}")

    periods = [t for t in periods if _period_length(candidate_S, t) < patch_radius]
    defects = [norm_ap_defect(candidate_S, t, patch_radius) for t in periods]
    means = null_mean(candidate_0, seq)
    passing = sum(1 for d in defects if d < ap_tolerance)
    if passing < 3:
        return UniquenessResult(False, defects, means, f"only {passing} periods pass the defect screen")
    settled = _is_decreasing(means[1:]) or max(means[1:]) < null_tolerance
    if not settled or means[-1] >= null_tolerance:
        return UniquenessResult(False, defects, means, "null mean does not decay below tolerance")
    return UniquenessResult(True, defects, means, "norm almost periodic + null mean")


def positive_definite_check(coeffs: CoefficientMap, points: np.ndarray, samples: int = None,
                            size: int = None, seed: int = 0) -> float:
    """
    Smallest eigenvalue of [c(z_i - z_j)] over random subsets of points,
    relative to c(0). Nonnegative up to rounding for positive definite maps.
    """
    samples = samples or Config.PSD_SAMPLES
    size = size or Config.PSD_SAMPLE_SIZE
    rng = np.random.Generator(np.random.PCG64(seed))
    origin = abs(coeffs.get(np.zeros(points.shape[1], dtype=points.dtype))) or 1.0
    worst = np.inf
    for _ in range(samples):
        chosen = points[rng.choice(len(points), size=min(size, len(points)), replace=False)]
        diffs = (chosen[:, None, :] - chosen[None, :, :]).reshape(-1, points.shape[1])
        matrix = coeffs.lookup(diffs).reshape(len(chosen), len(chosen))
        matrix = 0.5 * (matrix + matrix.conj().T)
        worst = min(worst, float(np.linalg.eigvalsh(matrix).min()) / origin)
    return worst
