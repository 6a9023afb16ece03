"""
Desk-scale checks of the structure theorem for autocorrelations of combs
supported in a model set, one ClaimResult per clause:

  i     support of gamma_S and gamma_0 inside Lambda(cl(W - W))
  ii    norm almost periodicity defect of gamma_S
  iii   null mean of gamma_0
  v     Bragg set empty or relatively dense
  vi    same check for positive combs
  vii   continuous part empty or relatively dense
  viii  |I(psi + chi) - I(psi)| <= C eps for chi eps-dual
  ix    viii together with relative denseness of the eps-dual set
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence
import logging

import numpy as np

from utils.config import Config
from cps import autocorrelation as ac
from cps import diffraction as df
from cps.combs import WeightedComb
from cps.geometry import Box
from cps.scheme import density, dual_basis, physical_many
from cps.windows import WindowUnion, difference_window

logger = logging.getLogger(__name__)

PASS, FAIL, NA = "PASS", "FAIL", "N-A"


@dataclass
class ClaimResult:
    claim: str
    status: str
    measured: float
    bound: float
    detail: str = ""

    def line(self) -> str:
        return f"CLAIM {self.claim} {self.status} measured={self.measured!r} bound={self.bound!r}"


@dataclass
class VerificationContext:
    """Everything the claims share, computed once per comb"""
    comb: WeightedComb
    oracle: ac.OracleKind
    R: float
    freq_box: Box
    gamma: ac.Autocorrelation
    decomposition: ac.Decomposition
    spectrum: df.Spectrum
    floor: df.NoiseFloor
    extras: Dict[str, object] = field(default_factory=dict)

    @property
    def window(self) -> WindowUnion:
        return self.comb.patch.window


def build_context(comb: WeightedComb, oracle: ac.OracleKind, R: float, freq_box: Box,
                  threads: int = None) -> VerificationContext:
    scheme = comb.scheme
    gamma = ac.autocorrelation(comb, R, threads=threads)
    decomposition = ac.decompose(gamma, oracle)
    candidates = df.bragg_candidates(dual_basis(scheme), comb.patch.window, None, freq_box)
    spectrum = df.spectrum(comb, candidates, R, threads=threads)
    floor = df.noise_floor(comb, candidates, freq_box, R)
    return VerificationContext(comb, oracle, R, freq_box, gamma, decomposition, spectrum, floor)


def claim_support(ctx: VerificationContext) -> ClaimResult:
    report = ac.support_check(ctx.gamma, ctx.comb.scheme, ctx.window)
    return ClaimResult("i", PASS if report.passed else FAIL, float(report.violations), 0.0,
                       f"{report.checked} keys checked")


def claim_norm_almost_periodic(ctx: VerificationContext) -> ClaimResult:
    periods = ac.almost_period_candidates(ctx.comb.scheme)
    lengths = np.max(np.abs(physical_many(ctx.comb.scheme, periods)), axis=1) if len(periods) else np.zeros(0)
    periods = periods[lengths < ctx.R]
    tolerance = Config.NORM_AP_TOLERANCE
    if not len(periods):
        return ClaimResult("ii", NA, float('nan'), tolerance, "no candidate period fits inside A_R")
    defects = [ac.norm_ap_defect(ctx.decomposition.gamma_S, t, ctx.R) for t in periods]
    worst = max(defects) if defects else 0.0
    passing = sum(1 for d in defects if d < tolerance)
    status = PASS if passing >= min(3, len(periods)) else FAIL
    return ClaimResult("ii", status, worst, tolerance, f"{passing}/{len(periods)} periods below tolerance")


def claim_null_mean(ctx: VerificationContext) -> ClaimResult:
    """Finite-volume null means on R/32, ..., R: decreasing after the first and down by the decay ratio"""
    seq = ac.VanHoveSequence.geometric(ctx.R / 32.0, 6, ctx.comb.scheme.d)
    means = ac.finite_volume_null_means(ctx.comb, ctx.oracle, seq)
    ctx.extras['null_means'] = list(zip(seq.radii, means))
    ctx.extras['gamma_0_at_0'] = ctx.decomposition.gamma_0.get(np.zeros(ctx.comb.scheme.n, dtype=np.int64)).real
    ratio = means[-1] / means[0] if means[0] > 0 else 0.0
    decreasing = all(b < a or b == 0.0 for a, b in zip(means[1:-1], means[2:]))
    passed = decreasing and ratio < Config.NULL_MEAN_DECAY_RATIO and means[-1] < Config.NULL_MEAN_TOLERANCE
    return ClaimResult("iii", PASS if passed else FAIL, ratio, Config.NULL_MEAN_DECAY_RATIO,
                       f"null means {means}")


def _bragg_covering(ctx: VerificationContext, box: Box) -> Optional[float]:
    scheme = ctx.comb.scheme
    level = Config.INTENSITY_THRESHOLD_FACTOR * ctx.floor.level
    if box is ctx.freq_box:
        retained = ctx.spectrum.above(level)
    else:
        candidates = df.bragg_candidates(dual_basis(scheme), ctx.window, None, box)
        retained = df.spectrum(ctx.comb, candidates, ctx.R).above(level)
    if not len(retained):
        return None
    return df.covering_radius(retained.frequencies, box)


def claim_bragg_dense(ctx: VerificationContext, claim: str = "v") -> ClaimResult:
    bound = Config.BRAGG_COVERING_BOUND
    first = _bragg_covering(ctx, ctx.freq_box)
    if first is None:
        return ClaimResult(claim, PASS, float('inf'), bound, "no Bragg peak above threshold (empty)")
    second = _bragg_covering(ctx, ctx.freq_box.scaled(2.0))
    second = float('inf') if second is None else second
    stable = abs(second - first) <= Config.COVERING_STABILITY * first + 1e-12
    ctx.extras['bragg_covering'] = (first, second)
    status = PASS if first < bound and stable else FAIL
    return ClaimResult(claim, status, first, bound, f"doubled box covering {second}")


def claim_positive_bragg(ctx: VerificationContext) -> ClaimResult:
    if not ctx.comb.is_nonnegative:
        return ClaimResult("vi", NA, float('nan'), float('nan'), "comb has negative or complex weights")
    return claim_bragg_dense(ctx, claim="vi")


def residual_cutoff(comb: WeightedComb, guard: float) -> float:
    """
    Internal cutoff for the guarded candidates: the residual cutoff, reduced
    until the guard balls cover about half of frequency space.
    """
    dual = dual_basis(comb.scheme)
    d, m = dual.d, dual.m
    share = 0.5 / (density(dual) * (2.0 * guard) ** d)
    return min(Config.RESIDUAL_INTERNAL_CUTOFF, 0.5 * share ** (1.0 / m))


def residual_levels(comb: WeightedComb, R: float, freq_box: Box, guard: float = None,
                    threads: int = None) -> List[float]:
    """Bin levels of the continuous residual, guarding every candidate up to residual_cutoff"""
    guard = guard if guard is not None else Config.GUARD_FACTOR / (2.0 * R)
    peaks = df.bragg_candidates(dual_basis(comb.scheme), comb.patch.window, None,
                                freq_box.scaled(1.1), internal_cutoff=residual_cutoff(comb, guard))
    bins = df.continuous_residual(comb, df.residual_grid(freq_box), R, peaks.frequencies,
                                  guard=guard, threads=threads)
    return [level for _, level in bins]


def claim_continuous(ctx: VerificationContext) -> ClaimResult:
    """
    Levels at R/2 and R with the guard of R/2: decay means an empty continuous
    part, otherwise the level at R must be spread over the whole box. Both
    branches pass when measured <= bound.
    """
    small = ctx.R / 2.0
    guard = Config.GUARD_FACTOR / (2.0 * small)
    box = ctx.extras.get('residual_box', ctx.freq_box)
    first = residual_levels(ctx.comb, small, box, guard=guard)
    second = residual_levels(ctx.comb, ctx.R, box, guard=guard)
    ctx.extras['residual'] = (first, second)
    if not first or not second:
        return ClaimResult("vii", NA, float('nan'), float('nan'), "no residual grid points")
    mean_first, mean_second = float(np.mean(first)), float(np.mean(second))
    shrink = mean_second / mean_first if mean_first > 0 else (0.0 if mean_second == 0 else float('inf'))
    if shrink <= 1.0 / Config.RESIDUAL_DECAY_RATIO:
        return ClaimResult("vii", PASS, shrink, 1.0 / Config.RESIDUAL_DECAY_RATIO, "continuous part empty")
    # the weakest bin may sit at most a factor 2 below the median
    lowest, median = min(second), float(np.median(second))
    unevenness = median / lowest if lowest > 0 else float('inf')
    status = PASS if unevenness <= 2.0 else FAIL
    return ClaimResult("vii", status, unevenness, 2.0, f"continuous level {mean_second} (shrink {shrink})")


def eps_dual_members(comb: WeightedComb, W: WindowUnion, eps: float, count: int,
                     start_radius: float = 10.0) -> df.EpsDualSet:
    """At least count members of the eps-dual set, widening the frequency box as needed"""
    dual = dual_basis(comb.scheme)
    radius = start_radius
    members = df.eps_dual_characters(dual, W, eps, Box.centered(radius, comb.scheme.d))
    while len(members) < count and radius < 1e4:
        radius *= 2.0
        members = df.eps_dual_characters(dual, W, eps, Box.centered(radius, comb.scheme.d))
    return members.nearest_first(count)


def claim_lipschitz(ctx: VerificationContext, epsilons: Sequence[float] = None,
                    count: int = 10) -> ClaimResult:
    epsilons = epsilons or Config.EPSILONS
    top = ctx.spectrum.top(count)
    psis = df.EpsDualSet(None, top.frequencies, np.array([e.key for e in top.entries], dtype=np.int64))
    diff = difference_window(ctx.window)
    C_est = df.lipschitz_constant(ctx.gamma)
    reports = []
    for eps in epsilons:
        Gamma = eps_dual_members(ctx.comb, diff, eps, count)
        reports.append(df.lipschitz_bound_check(ctx.comb, ctx.gamma, Gamma, psis, C_est=C_est, R=ctx.R))
    ctx.extras['lipschitz'] = reports
    violations = sum(r.violations for r in reports)
    worst = max(r.max_ratio for r in reports)
    return ClaimResult("viii", PASS if violations == 0 else FAIL, worst, 1.0,
                       f"C_est={C_est}, violations={violations}")


def claim_sup_almost_periodic(ctx: VerificationContext, lipschitz: ClaimResult) -> ClaimResult:
    """viii plus a finite covering radius of the eps-dual set, stable when its box doubles"""
    eps = max(Config.EPSILONS)
    dual = dual_basis(ctx.comb.scheme)
    diff = difference_window(ctx.window)
    d = ctx.comb.scheme.d
    radius = Config.DUAL_COVERING_RADIUS
    covering = []
    for box in (Box.centered(radius, d), Box.centered(2.0 * radius, d)):
        members = df.eps_dual_characters(dual, diff, eps, box.scaled(1.5))
        covering.append(df.covering_radius(members.frequencies, box) if len(members) else float('inf'))
    first, second = covering
    change = abs(second - first) / first if np.isfinite(first) and first > 0 else float('inf')
    stable = change <= Config.COVERING_STABILITY + 1e-12
    status = PASS if lipschitz.status == PASS and stable else FAIL
    return ClaimResult("ix", status, change, Config.COVERING_STABILITY,
                       f"eps={eps}, covering {first} then {second} on the doubled box")


def run_claims(ctx: VerificationContext, epsilons: Sequence[float] = None) -> List[ClaimResult]:
    """All clauses in report order; a clause that raises is recorded as FAIL"""
    results = []
    steps = [
        ("i", lambda: claim_support(ctx)),
        ("ii", lambda: claim_norm_almost_periodic(ctx)),
        ("iii", lambda: claim_null_mean(ctx)),
        ("v", lambda: claim_bragg_dense(ctx)),
        ("vi", lambda: claim_positive_bragg(ctx)),
        ("vii", lambda: claim_continuous(ctx)),
        ("viii", lambda: claim_lipschitz(ctx, epsilons)),
    ]
    for claim, step in steps:
        try:
            results.append(step())
        except Exception as e:
            logger.error(f"Claim {claim} could not be evaluated: {e}", exc_info=True)
            results.append(ClaimResult(claim, FAIL, float('nan'), float('nan'), str(e)))
    lipschitz = results[-1]
    try:
        results.append(claim_sup_almost_periodic(ctx, lipschitz))
    except Exception as e:
        logger.error(f"Claim ix could not be evaluated: {e}", exc_info=True)
        results.append(ClaimResult("ix", FAIL, float('nan'), float('nan'), str(e)))
    for result in results:
        logger.info(f"{result.line()} {result.detail}")
    return results
