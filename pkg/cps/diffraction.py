"""
Diffraction of weighted combs.

Intensities are estimated two ways: the Fourier-Bohr sum S_R(k) of the comb,
and the volume average of gamma_R against the character at k. Frequencies
that come from the dual lattice carry their integer key, and every phase at
such a frequency is computed through the exact pairing

    k.x = w.z - k*.x*        (w.z an integer)

so only the small internal product is ever rounded.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple
import logging
import math
import time

import numpy as np
from scipy.spatial import cKDTree

from utils.config import Config
from cps.autocorrelation import Autocorrelation, box_overlap_fraction
from cps.combs import WeightedComb, model_set
from cps.errors import CertificationFailure, EmptySet, InnerTooLarge, RegionTooSmall
from cps.geometry import Box, grid_covering_radius
from cps.scheme import DualSchemeBasis, SchemeBasis, dual_basis, embed_many, enumerate_lattice, star_many
from cps.windows import PredicateWindow, WindowUnion, eps_dual_window

logger = logging.getLogger(__name__)


@dataclass
class SpectrumEntry:
    frequency: Tuple[float, ...]
    key: Optional[Tuple[int, ...]]
    intensity: float


@dataclass
class Spectrum:
    entries: List[SpectrumEntry]
    R: float
    method: str = "bohr_sum"

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def frequencies(self) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, 1))
        return np.array([e.frequency for e in self.entries], dtype=float)

    @property
    def intensities(self) -> np.ndarray:
        return np.array([e.intensity for e in self.entries], dtype=float)

    def top(self, count: int) -> 'Spectrum':
        """Strongest entries first; ties keep input order"""
        order = sorted(range(len(self.entries)), key=lambda i: -self.entries[i].intensity)[:count]
        return Spectrum([self.entries[i] for i in order], self.R, self.method)

    def above(self, level: float) -> 'Spectrum':
        return Spectrum([e for e in self.entries if e.intensity > level], self.R, self.method)


@dataclass
class EpsDualSet:
    """
    Frequencies from a dual scheme, with their integer keys.

    eps is None for plain Bragg candidate lists. For eps-dual sets, window is
    the internal-side membership test every member passed.
    """
    eps: Optional[float]
    frequencies: np.ndarray
    keys: Optional[np.ndarray]
    window_descriptor: str = ""
    certified_points: int = 0
    window: Optional[PredicateWindow] = None

    def __len__(self) -> int:
        return len(self.frequencies)

    def subset(self, index) -> 'EpsDualSet':
        keys = self.keys[index] if self.keys is not None else None
        return EpsDualSet(self.eps, self.frequencies[index], keys, self.window_descriptor, self.certified_points,
                          self.window)

    def nearest_first(self, count: int) -> 'EpsDualSet':
        lengths = np.max(np.abs(self.frequencies), axis=1) if len(self) else np.zeros(0)
        return self.subset(np.argsort(lengths, kind='stable')[:count])


@dataclass
class NoiseFloor:
    level: float
    probes: np.ndarray
    intensities: np.ndarray


@dataclass
class LipschitzReport:
    eps: float
    C_est: float
    slack: float
    bound: float
    max_ratio: float
    violations: int
    table: List[Tuple[int, int, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _turns(scheme: SchemeBasis, points: np.ndarray, physical: np.ndarray, k: np.ndarray,
           key: Optional[np.ndarray], dual: Optional[SchemeBasis]) -> np.ndarray:
    """k.x modulo 1 for each point x"""
    if key is None:
        return physical @ k
    k_internal = (dual.B @ np.asarray(key, dtype=float))[scheme.d:]
    internal = star_many(scheme, points)
    return -(internal @ k_internal)


def _bohr_sums(c: WeightedComb, inside: np.ndarray, ks: np.ndarray, keys: Optional[np.ndarray],
               volume: float) -> np.ndarray:
    scheme = c.scheme
    dual = dual_basis(scheme) if keys is not None else None
    points = c.patch.points[inside]
    physical = c.patch.physical[inside]
    weights = c.weights[inside]
    out = np.zeros(len(ks), dtype=complex)
    for i, k in enumerate(ks):
        key = keys[i] if keys is not None else None
        terms = weights * np.exp(-2j * np.pi * _turns(scheme, points, physical, k, key, dual))
        out[i] = complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist())) / volume
    return out


def _window_inside(c: WeightedComb, R: float) -> np.ndarray:
    box = Box.centered(R, c.scheme.d)
    if not c.patch.region.covers(box):
        raise RegionTooSmall(f"A_R with R={R} is not inside comb region {c.patch.region}")
    return box.contains(c.patch.physical)


def fourier_bohr(c: WeightedComb, k, R: float, key=None) -> complex:
    """
    S_R(k) = (1/Vol(A_R)) * sum over x in A_R of omega(x) exp(-2 pi i k.x),
    summed in patch order with math.fsum.

    Raises:
        RegionTooSmall: If A_R is not inside the comb region.
    """
    ks = np.atleast_2d(np.asarray(k, dtype=float))
    keys = None if key is None else np.atleast_2d(np.asarray(key, dtype=np.int64))
    return complex(fourier_bohr_many(c, ks, R, keys=keys, threads=1)[0])


def fourier_bohr_many(c: WeightedComb, ks: np.ndarray, R: float, keys: np.ndarray = None,
                      threads: int = None) -> np.ndarray:
    """S_R at each row of ks; chunks run on a thread pool and are merged in input order"""
    ks = np.asarray(ks, dtype=float).reshape(-1, c.scheme.d)
    inside = _window_inside(c, R)
    volume = (2.0 * R) ** c.scheme.d
    chunk = max(1, int(Config.FREQUENCY_CHUNK))
    spans = [(s, min(len(ks), s + chunk)) for s in range(0, len(ks), chunk)]
    task = lambda span: _bohr_sums(c, inside, ks[span[0]:span[1]],
                                   keys[span[0]:span[1]] if keys is not None else None, volume)
    workers = threads or Config.MAX_WORKERS
    start = time.time()
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, spans))
    else:
        parts = [task(span) for span in spans]
    logger.debug(f"Fourier-Bohr sums at {len(ks)} frequencies, R={R}: {time.time() - start:.2f}s")
    return np.concatenate(parts) if parts else np.zeros(0, dtype=complex)


def spectrum(c: WeightedComb, candidates: EpsDualSet, R: float, threads: int = None) -> Spectrum:
    """|S_R|^2 at every candidate frequency"""
    sums = fourier_bohr_many(c, candidates.frequencies, R, keys=candidates.keys, threads=threads)
    intensities = np.abs(sums) ** 2
    entries = []
    for i in range(len(candidates)):
        key = tuple(int(v) for v in candidates.keys[i]) if candidates.keys is not None else None
        entries.append(SpectrumEntry(tuple(float(v) for v in candidates.frequencies[i]), key, float(intensities[i])))
    return Spectrum(entries, R, "bohr_sum")


def intensity_via_autocorr(gamma: Autocorrelation, k, inner_radius: float, key=None,
                           boundary_correction: bool = True) -> float:
    """
    Sum of gamma_R(z) exp(-2 pi i k.z) over keys with |physical(z)| <= inner_radius,
    divided by the inner box volume.

    With boundary_correction each coefficient is first divided by the
    box-overlap fraction of A_R at its lag.

    Raises:
        InnerTooLarge: If inner_radius exceeds R/2.
    """
    if inner_radius > gamma.R / 2.0 + 1e-12:
        raise InnerTooLarge(f"inner radius {inner_radius} exceeds R/2 = {gamma.R / 2.0}")
    scheme = gamma.scheme
    coeffs = gamma.coefficients
    mask = coeffs.within(inner_radius)
    keys = coeffs.keys[mask]
    physical = coeffs.positions[mask]
    values = coeffs.values[mask]
    if boundary_correction:
        values = values / box_overlap_fraction(physical, gamma.R)

    k = np.asarray(k, dtype=float).reshape(-1)
    dual = dual_basis(scheme) if key is not None else None
    terms = values * np.exp(-2j * np.pi * _turns(scheme, keys, physical, k, key, dual))
    volume = (2.0 * inner_radius) ** scheme.d
    re = math.fsum(terms.real.tolist()) / volume
    im = math.fsum(terms.imag.tolist()) / volume
    if abs(im) > 1e-6 * abs(re) and abs(im) > 1e-15:
        logger.warning(f"Autocorrelation intensity at k={k} has imaginary residue {im:.3e} (real {re:.3e})")
    return re


def bragg_candidates(dual: SchemeBasis, W: WindowUnion, eps: Optional[float], freq_box: Box,
                     internal_cutoff: float = None) -> EpsDualSet:
    """
    Dual lattice points with physical part in freq_box and internal part in
    [-K, K]^m; W and eps only label the result.

    Raises:
        OversizeError: If the enumeration exceeds the candidate budget.
    """
    K = internal_cutoff or Config.INTERNAL_CUTOFF
    if freq_box.is_empty:
        return EpsDualSet(eps, np.zeros((0, dual.d)), np.zeros((0, dual.n), dtype=np.int64), f"|k*| <= {K}")
    keys = enumerate_lattice(dual, freq_box, Box.centered(K, dual.m))
    physical, _ = embed_many(dual, keys)
    logger.info(f"{len(keys)} Bragg candidates of '{dual.name}' in {freq_box} with internal cutoff {K}")
    return EpsDualSet(eps, physical, keys, f"|k*| <= {K}")


def eps_dual_characters(dual: SchemeBasis, W: WindowUnion, eps: float, freq_box: Box,
                        certify_radius: float = None) -> EpsDualSet:
    """
    Lambda(N(cl W, eps)) in the dual scheme, restricted to freq_box, with every
    member certified against a primal patch of Lambda(W):
    max over x of |exp(2 pi i k.x) - 1| <= eps.

    Raises:
        CertificationFailure: If a member violates the patch bound.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    primal = dual.primal if isinstance(dual, DualSchemeBasis) and dual.primal is not None else dual_basis(dual)

    # outside [-1/width, 1/width] the character sweeps a full turn on some box of W
    K = Config.INTERNAL_CUTOFF
    if eps < 2.0:
        widths = np.max([np.subtract(b.hi, b.lo) for b in W.boxes], axis=0)
        reach = np.where(widths > 0, 1.0 / np.where(widths > 0, widths, 1.0), K)
        internal_box = Box(tuple(-np.minimum(reach, K)), tuple(np.minimum(reach, K)))
    else:
        internal_box = Box.centered(K, dual.m)

    keys = enumerate_lattice(dual, freq_box, internal_box)
    physical, internal = embed_many(dual, keys)
    # every character stays within 2 of 1, so eps >= 2 admits all of them
    window = eps_dual_window(W, eps) if eps < 2.0 else None
    member = window(internal) if window is not None and len(keys) else np.ones(len(keys), dtype=bool)
    keys, physical, internal = keys[member], physical[member], internal[member]

    certify_radius = certify_radius or Config.CERTIFY_RADIUS
    patch = model_set(primal, W, Box.centered(certify_radius, primal.d))
    if len(keys) and len(patch):
        # k.x = w.z - k*.x*, and w.z is an integer
        turns = patch.internal @ internal.T
        worst = np.max(2.0 * np.abs(np.sin(np.pi * turns)), axis=0)
        failed = np.flatnonzero(worst > eps + Config.CERTIFICATION_SLACK)
        if len(failed):
            raise CertificationFailure(f"{len(failed)} of {len(keys)} eps-dual members exceed eps={eps} "
                                       f"on the primal patch, worst {worst[failed].max()}")
    logger.info(f"eps-dual set for eps={eps}: {len(keys)} members certified on {len(patch)} points")
    descriptor = window.descriptor if window is not None else f"N(cl {W.descriptor or 'W'}, {eps})"
    return EpsDualSet(eps, physical, keys, descriptor, certified_points=len(patch), window=window)


def noise_floor(c: WeightedComb, candidates: EpsDualSet, freq_box: Box, R: float,
                probes: int = None, seed: int = 0) -> NoiseFloor:
    """
    Largest |S_R|^2 over off-module probes: midpoints of the widest gaps
    between candidates (d = 1), or random points away from every candidate (d = 2).
    """
    probes = probes or Config.NOISE_PROBES
    d = c.scheme.d
    freqs = candidates.frequencies
    if d == 1:
        inside = freqs[freq_box.contains(freqs), 0] if len(freqs) else np.zeros(0)
        edges = np.unique(np.concatenate([[freq_box.lo[0], freq_box.hi[0]], inside]))
        gaps = np.diff(edges)
        widest = np.argsort(-gaps, kind='stable')[:probes]
        points = ((edges[widest] + edges[widest + 1]) / 2.0).reshape(-1, 1)
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        guard = Config.GUARD_FACTOR / (2.0 * R) ** (1.0 / d)
        tree = cKDTree(freqs) if len(freqs) else None
        kept = []
        for _ in range(100):
            trial = rng.uniform(freq_box.lo, freq_box.hi, size=(4 * probes, d))
            if tree is not None:
                distance, _ = tree.query(trial)
                trial = trial[distance > guard]
            kept.extend(trial.tolist())
            if len(kept) >= probes:
                break
        points = np.array(kept[:probes], dtype=float).reshape(-1, d)
    if not len(points):
        raise EmptySet(f"No noise probes fit in {freq_box}")
    intensities = np.abs(fourier_bohr_many(c, points, R)) ** 2
    return NoiseFloor(float(intensities.max()), points, intensities)


def lipschitz_constant(gamma: Autocorrelation, fractions=(0.125, 0.25, 0.5, 1.0), headroom: float = None) -> float:
    """max over A_(f R) of |gamma_R|(A)/Vol(A), plus headroom"""
    headroom = Config.LIPSCHITZ_HEADROOM if headroom is None else headroom
    magnitudes = np.abs(gamma.coefficients.values)
    best = 0.0
    for f in fractions:
        r = f * gamma.R
        mask = gamma.coefficients.within(r)
        best = max(best, float(magnitudes[mask].sum()) / (2.0 * r) ** gamma.scheme.d)
    return best * (1.0 + headroom)


def lipschitz_bound_check(c: WeightedComb, gamma: Autocorrelation, Gamma: EpsDualSet, psis: EpsDualSet,
                          C_est: float = None, R: float = None, threads: int = None) -> LipschitzReport:
    """
    For every psi and chi in Gamma: ||S_R(psi+chi)|^2 - |S_R(psi)|^2| <= C_est*eps + slack,
    where slack is the largest change of these intensities between R and 2R
    (0 when the comb region does not reach 2R).
    """
    R = R or gamma.R
    eps = Gamma.eps
    if eps is None or eps <= 0:
        raise ValueError("Lipschitz check needs an eps-dual set with eps > 0")
    C_est = C_est if C_est is not None else lipschitz_constant(gamma)
    d = c.scheme.d

    shifted = (psis.frequencies[:, None, :] + Gamma.frequencies[None, :, :]).reshape(-1, d)
    exact = psis.keys is not None and Gamma.keys is not None
    shifted_keys = (psis.keys[:, None, :] + Gamma.keys[None, :, :]).reshape(-1, c.scheme.n) if exact else None
    freqs = np.concatenate([psis.frequencies, shifted])
    keys = np.concatenate([psis.keys, shifted_keys]) if exact else None

    intensities = np.abs(fourier_bohr_many(c, freqs, R, keys=keys, threads=threads)) ** 2
    slack = 0.0
    if c.patch.region.covers(Box.centered(2.0 * R, d)):
        wider = np.abs(fourier_bohr_many(c, freqs, 2.0 * R, keys=keys, threads=threads)) ** 2
        slack = float(np.max(np.abs(wider - intensities)))
    else:
        logger.info(f"Comb region does not reach 2R={2.0 * R}; Lipschitz slack set to 0")

    base = intensities[:len(psis)]
    moved = intensities[len(psis):].reshape(len(psis), len(Gamma))
    delta = np.abs(moved - base[:, None])
    bound = C_est * eps + slack
    table = [(i, j, float(delta[i, j])) for i in range(len(psis)) for j in range(len(Gamma))]
    violations = int(np.count_nonzero(delta > bound))
    max_ratio = float(delta.max() / bound) if delta.size and bound > 0 else 0.0
    if violations:
        logger.warning(f"Lipschitz bound C*eps={C_est * eps:.4g} (+{slack:.3g}) violated {violations} times")
    return LipschitzReport(eps, C_est, slack, bound, max_ratio, violations, table)


def covering_radius(freqs: np.ndarray, box: Box) -> float:
    """
    Largest distance from a grid point of box to the nearest frequency.

    Raises:
        EmptySet: If freqs is empty.
    """
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0:
        raise EmptySet("Covering radius of an empty frequency list")
    return grid_covering_radius(freqs.reshape(-1, box.dim), box)


def residual_grid(freq_box: Box, points: int = None) -> np.ndarray:
    """Evenly spaced frequencies filling freq_box, about points of them"""
    points = points or Config.RESIDUAL_GRID_POINTS
    per_axis = max(2, int(round(points ** (1.0 / freq_box.dim))))
    axes = [np.linspace(l, h, per_axis) for l, h in zip(freq_box.lo, freq_box.hi)]
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=1)


def continuous_residual(c: WeightedComb, grid: np.ndarray, R: float, peak_list: np.ndarray,
                        guard: float = None, bins: int = None, threads: int = None) -> List[Tuple[float, float]]:
    """
    Mean of |S_R(k)|^2 * Vol(A_R) over the grid points farther than guard
    from every listed peak, per bin of consecutive grid points.

    Returns (bin center along the first axis, level) pairs; empty bins are dropped.
    """
    d = c.scheme.d
    volume = (2.0 * R) ** d
    guard = guard if guard is not None else Config.GUARD_FACTOR / volume ** (1.0 / d)
    bins = bins or Config.RESIDUAL_BINS
    grid = np.asarray(grid, dtype=float).reshape(-1, d)
    peaks = np.asarray(peak_list, dtype=float).reshape(-1, d)
    if len(peaks):
        distance, _ = cKDTree(peaks).query(grid)
        grid = grid[distance > guard]
    if not len(grid):
        logger.warning("Every residual grid point lies within the peak guard")
        return []

    levels = np.abs(fourier_bohr_many(c, grid, R, threads=threads)) ** 2 * volume
    result = []
    for part, values in zip(np.array_split(grid, bins), np.array_split(levels, bins)):
        if len(part):
            result.append((float(part[:, 0].mean()), float(values.mean())))
    logger.info(f"Continuous residual at R={R}: {len(grid)} grid points, mean level {levels.mean():.4g}")
    return result
