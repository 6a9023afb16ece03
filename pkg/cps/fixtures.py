"""
Hand-built measures with exact positions.

  two_lattices:          delta_Z + delta_(sqrt2 Z + 1/2); positive definite
                         support, not norm almost periodic.
  integers_minus_shifts: delta_Z - sum over n != 0 of delta_(n - 1/n); its
                         absolute mean is 2 although every average tends to 0.
  adversarial_comb:      unit comb of a model-set patch plus one lattice point
                         whose star lies far outside the window.
"""
from fractions import Fraction
import logging
import math

import numpy as np

from cps.autocorrelation import CoefficientMap
from cps.combs import PointSetPatch, WeightedComb
from cps.errors import EmptySet
from cps.geometry import Box
from cps.scheme import enumerate_lattice, physical_many

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


def _two_lattices_locate(keys: np.ndarray) -> np.ndarray:
    keys = np.asarray(keys, dtype=float).reshape(-1, 3)
    return (keys[:, 0] + keys[:, 1] * SQRT2 + keys[:, 2] * 0.5).reshape(-1, 1)


def two_lattices(extent: float) -> CoefficientMap:
    """
    delta_Z + delta_(sqrt2 Z + 1/2) on [-extent, extent].

    Key (a, b, c) stands for the position a + b*sqrt2 + c/2, so integer
    atoms are (n, 0, 0) and the shifted family is (0, k, 1).
    """
    n_max = int(math.floor(extent))
    integers = np.array([(n, 0, 0) for n in range(-n_max, n_max + 1)], dtype=np.int64)
    k_lo = int(math.ceil((-extent - 0.5) / SQRT2))
    k_hi = int(math.floor((extent - 0.5) / SQRT2))
    shifted = np.array([(0, k, 1) for k in range(k_lo, k_hi + 1)], dtype=np.int64).reshape(-1, 3)
    keys = np.concatenate([integers, shifted])
    order = np.argsort(_two_lattices_locate(keys)[:, 0], kind='stable')
    keys = keys[order]
    return CoefficientMap(keys, np.ones(len(keys)), _two_lattices_locate, "two_lattices")


def _fraction_locate(keys: np.ndarray) -> np.ndarray:
    keys = np.asarray(keys, dtype=object).reshape(-1, 1)
    return np.array([[float(v) for v in row] for row in keys], dtype=float).reshape(-1, 1)


def integers_minus_shifts(extent: float) -> CoefficientMap:
    """
    delta_Z - sum over n != 0 of delta_(n - 1/n) on [-extent, extent], with
    exact rational positions. The atoms at n = 1 and n = -1 both land on 0,
    where they meet the integer atom.
    """
    n_max = int(math.floor(extent))
    atoms = {}
    for n in range(-n_max, n_max + 1):
        key = Fraction(n)
        atoms[key] = atoms.get(key, 0) + 1
    for n in range(-n_max - 1, n_max + 2):
        if n == 0:
            continue
        key = Fraction(n) - Fraction(1, n)
        if abs(key) <= extent:
            atoms[key] = atoms.get(key, 0) - 1
    ordered = sorted(k for k, v in atoms.items() if v != 0)
    keys = np.empty((len(ordered), 1), dtype=object)
    for i, k in enumerate(ordered):
        keys[i, 0] = k
    values = np.array([atoms[k] for k in ordered], dtype=float)
    logger.debug(f"integers_minus_shifts on [-{extent}, {extent}]: {len(ordered)} atoms")
    return CoefficientMap(keys, values, _fraction_locate, "integers_minus_shifts")


def adversarial_comb(patch: PointSetPatch, star_target: float = 5.0) -> WeightedComb:
    """
    Unit comb on patch plus the lattice point nearest the origin whose star
    lies within 1/2 of star_target (per coordinate), outside the window.

    Raises:
        EmptySet: If no such lattice point exists in the patch region.
    """
    scheme = patch.scheme
    target = Box.centered(0.5, scheme.m)
    target = Box(tuple(np.asarray(target.lo) + star_target), tuple(np.asarray(target.hi) + star_target))
    extra = enumerate_lattice(scheme, patch.region, target)
    if not len(extra):
        raise EmptySet(f"No lattice point with star near {star_target} in {patch.region}")
    nearest = extra[np.argmin(np.max(np.abs(physical_many(scheme, extra)), axis=1))]

    points = np.concatenate([patch.points, nearest[None, :]])
    points = points[np.lexsort(points.T[::-1])]
    bad = PointSetPatch(scheme, patch.window, patch.region, points, patch.boundary_ambiguous_count)
    logger.info(f"Adversarial comb: added {tuple(int(v) for v in nearest)} outside the window")
    return WeightedComb(bad, np.ones(len(bad)), weight_model="adversarial", bound=1.0)
