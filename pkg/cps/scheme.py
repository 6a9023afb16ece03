"""
Euclidean cut-and-project schemes.

A scheme is an invertible (d+m)x(d+m) matrix B whose columns generate the
lattice L~ in R^d x R^m. Lattice points are always carried as exact integer
coordinate vectors z; the physical part x and internal part x* (the star
map) are derived from B.z on demand.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple
import logging
import math
import time

import numpy as np

from utils.config import Config
from cps.errors import OversizeError
from cps.geometry import Box

logger = logging.getLogger(__name__)

IntegerPoint = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SchemeBasis:
    """Cut-and-project scheme with physical dimension d and internal dimension m"""
    d: int
    m: int
    B: np.ndarray
    name: str = "scheme"
    Binv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d not in (1, 2) or self.m not in (1, 2):
            raise ValueError(f"Only d, m in {{1, 2}} are supported, got d={self.d}, m={self.m}")
        B = np.array(self.B, dtype=float)
        n = self.d + self.m
        if B.shape != (n, n):
            raise ValueError(f"Basis must be {n}x{n}, got {B.shape}")
        det = np.linalg.det(B)
        if not np.isfinite(det) or abs(det) <= 1e-12:
            raise ValueError(f"Basis '{self.name}' is not invertible (det={det})")
        B.setflags(write=False)
        Binv = np.linalg.inv(B)
        Binv.setflags(write=False)
        object.__setattr__(self, 'B', B)
        object.__setattr__(self, 'Binv', Binv)

    @property
    def n(self) -> int:
        return self.d + self.m

    @property
    def physical_rows(self) -> np.ndarray:
        return self.B[:self.d]

    @property
    def internal_rows(self) -> np.ndarray:
        return self.B[self.d:]

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.B))


@dataclass(frozen=True, eq=False)
class DualSchemeBasis(SchemeBasis):
    """Dual scheme with basis (B^T)^-1; keeps a reference to its primal scheme"""
    primal: Optional[SchemeBasis] = None


@dataclass
class InjectivityReport:
    radius: int
    tolerance: float
    witnesses: List[IntegerPoint]
    conclusive: bool

    @property
    def passed(self) -> bool:
        return not self.witnesses


def embed(basis: SchemeBasis, p) -> Tuple[np.ndarray, np.ndarray]:
    """Return (physical, internal) parts of B.p"""
    v = basis.B @ np.asarray(p, dtype=float)
    return v[:basis.d], v[basis.d:]


def embed_many(basis: SchemeBasis, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized embed for an (N, n) integer array"""
    pts = np.asarray(points, dtype=float).reshape(-1, basis.n)
    v = pts @ basis.B.T
    return v[:, :basis.d], v[:, basis.d:]


def star(basis: SchemeBasis, p) -> np.ndarray:
    return embed(basis, p)[1]


def star_many(basis: SchemeBasis, points: np.ndarray) -> np.ndarray:
    return embed_many(basis, points)[1]


def physical_many(basis: SchemeBasis, points: np.ndarray) -> np.ndarray:
    return embed_many(basis, points)[0]


def density(basis: SchemeBasis) -> float:
    """Density of the lattice L~, 1/|det B|"""
    return 1.0 / abs(basis.determinant)


def dual_basis(basis: SchemeBasis) -> SchemeBasis:
    """Dual scheme; the dual of a dual is its stored primal"""
    if isinstance(basis, DualSchemeBasis) and basis.primal is not None:
        return basis.primal
    Bdual = np.linalg.inv(basis.B).T
    return DualSchemeBasis(basis.d, basis.m, Bdual, name=f"{basis.name}*", primal=basis)


def pairing_defect(basis: SchemeBasis, dual: SchemeBasis, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Distance of (B.z).(B'.w) to the nearest integer, row by row"""
    left = np.atleast_2d(z).astype(float) @ basis.B.T
    right = np.atleast_2d(w).astype(float) @ dual.B.T
    pairing = np.sum(left * right, axis=1)
    return np.abs(pairing - np.round(pairing))


def _integer_bounds(basis: SchemeBasis, box: Box) -> Tuple[np.ndarray, np.ndarray]:
    corners = box.corners() @ basis.Binv.T
    zlo = np.floor(corners.min(axis=0) - 1e-9).astype(np.int64)
    zhi = np.ceil(corners.max(axis=0) + 1e-9).astype(np.int64)
    return zlo, zhi


def _scan_chunk(M, lo, hi, zlo, zhi, prefix_shape, start, stop):
    n = M.shape[1]
    k = M.shape[0]
    if n > 1:
        idx = np.arange(start, stop, dtype=np.int64)
        prefix = np.stack(np.unravel_index(idx, prefix_shape), axis=1).astype(np.int64) + zlo[:-1]
    else:
        prefix = np.zeros((1, 0), dtype=np.int64)

    c = prefix.astype(float) @ M[:, :-1].T if n > 1 else np.zeros((1, k))
    a = M[:, -1]
    rows = prefix.shape[0]
    t_lo = np.full(rows, -np.inf)
    t_hi = np.full(rows, np.inf)
    feasible = np.ones(rows, dtype=bool)
    for i in range(k):
        if abs(a[i]) < 1e-15:
            feasible &= (c[:, i] >= lo[i] - 1e-9) & (c[:, i] <= hi[i] + 1e-9)
            continue
        first = (lo[i] - c[:, i]) / a[i]
        second = (hi[i] - c[:, i]) / a[i]
        t_lo = np.maximum(t_lo, np.minimum(first, second))
        t_hi = np.minimum(t_hi, np.maximum(first, second))

    t_lo = np.maximum(np.ceil(t_lo - 1e-9), zlo[-1])
    t_hi = np.minimum(np.floor(t_hi + 1e-9), zhi[-1])
    counts = np.where(feasible, np.maximum(t_hi - t_lo + 1, 0), 0).astype(np.int64)
    total = int(counts.sum())
    if total == 0:
        return np.zeros((0, n), dtype=np.int64)

    owner = np.repeat(np.arange(rows), counts)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    last = t_lo[owner].astype(np.int64) + offsets
    Z = np.hstack([prefix[owner], last[:, None]])

    # exact closed-box filter on the real embedding
    V = Z.astype(float) @ M.T
    keep = np.all((V >= lo) & (V <= hi), axis=1)
    return Z[keep]


def scan_integer_box(M: np.ndarray, lo, hi, zlo, zhi, threads: int = None) -> np.ndarray:
    """
    All integers z in [zlo, zhi] with lo <= M.z <= hi, lexicographically sorted.

    The leading n-1 coordinates are scanned as a grid; the last coordinate
    is solved as an interval per grid row.
    """
    M = np.asarray(M, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    zlo = np.asarray(zlo, dtype=np.int64)
    zhi = np.asarray(zhi, dtype=np.int64)
    n = M.shape[1]
    if np.any(zhi < zlo) or np.any(hi < lo):
        return np.zeros((0, n), dtype=np.int64)

    prefix_shape = tuple(int(v) for v in (zhi[:-1] - zlo[:-1] + 1))
    prefix_count = int(np.prod(prefix_shape)) if n > 1 else 1
    chunk = max(1, int(Config.ENUMERATION_CHUNK_ROWS))
    bounds = [(s, min(prefix_count, s + chunk)) for s in range(0, prefix_count, chunk)]

    workers = threads or Config.MAX_WORKERS
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _scan_chunk(M, lo, hi, zlo, zhi, prefix_shape, *b), bounds))
    else:
        parts = [_scan_chunk(M, lo, hi, zlo, zhi, prefix_shape, *b) for b in bounds]
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, n), dtype=np.int64)


def enumerate_lattice(basis: SchemeBasis, physical_box: Box, internal_box: Box,
                      budget: int = None, threads: int = None) -> np.ndarray:
    """
    Integer points z with physical part in physical_box and internal part in
    internal_box, as an (N, d+m) int64 array in lexicographic order.

    The scan walks the leading n-1 coordinates of the integer bounding box
    and solves the last one per row, so its cost is the row count plus the
    expected number of hits, vol(product box) / |det B|.

    Raises:
        OversizeError: If that scan cost exceeds the candidate budget.
    """
    if physical_box.dim != basis.d or internal_box.dim != basis.m:
        raise ValueError(f"Box dimensions ({physical_box.dim}, {internal_box.dim}) "
                         f"do not match scheme ({basis.d}, {basis.m})")
    if physical_box.is_empty or internal_box.is_empty:
        return np.zeros((0, basis.n), dtype=np.int64)

    budget = budget or Config.CANDIDATE_BUDGET
    product = Box(physical_box.lo + internal_box.lo, physical_box.hi + internal_box.hi)
    zlo, zhi = _integer_bounds(basis, product)
    rows = math.prod(int(v) for v in (zhi[:-1] - zlo[:-1] + 1))
    expected = int(math.ceil(float(np.prod(product.widths)) / abs(basis.determinant)))
    candidates = rows + expected
    if candidates > budget:
        raise OversizeError(f"Enumeration scan of {rows} rows and about {expected} points exceeds budget {budget}")

    start = time.time()
    points = scan_integer_box(basis.B, product.lo, product.hi, zlo, zhi, threads=threads)
    logger.debug(f"Enumerated {len(points)} lattice points of '{basis.name}' "
                 f"from {candidates} candidates in {time.time() - start:.3f}s")
    return points


def injectivity_probe(basis: SchemeBasis, radius: int = None, tolerance: float = None) -> InjectivityReport:
    """
    Look for nonzero integer vectors in [-radius, radius]^n whose physical
    part is shorter than tolerance. Finding none is a diagnostic for the
    injectivity of the projection onto physical space, not a proof.
    """
    radius = radius or Config.INJECTIVITY_PROBE_RADIUS
    tolerance = tolerance or Config.INJECTIVITY_PROBE_TOLERANCE
    n = basis.n

    probe_budget = max(1, Config.CANDIDATE_BUDGET // 100)
    affordable = int((probe_budget ** (1.0 / (n - 1)) - 1) // 2)
    effective = min(radius, max(affordable, 1))
    if effective < radius:
        logger.warning(f"Injectivity probe for '{basis.name}' reduced to radius {effective} (requested {radius})")

    zlo = np.full(n, -effective, dtype=np.int64)
    zhi = np.full(n, effective, dtype=np.int64)
    lo = np.full(basis.d, -tolerance)
    hi = np.full(basis.d, tolerance)
    hits = scan_integer_box(basis.physical_rows, lo, hi, zlo, zhi)
    witnesses = [tuple(int(v) for v in z) for z in hits if np.any(z != 0)]
    if witnesses:
        logger.warning(f"Scheme '{basis.name}' has {len(witnesses)} short physical vectors, e.g. {witnesses[0]}")
    return InjectivityReport(radius=effective, tolerance=tolerance,
                             witnesses=witnesses, conclusive=effective == radius)
