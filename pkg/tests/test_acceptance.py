"""
Desk-scale runs on the Fibonacci scheme. Slow; deselect with -m "not slow".
"""
import math

import numpy as np
import pytest

from conftest import TAU
from utils.config import Config
from cps import autocorrelation as ac
from cps import diffraction as df
from cps import verification as vf
from cps.combs import comb_bernoulli, model_set, unit_comb
from cps.fixtures import adversarial_comb, integers_minus_shifts, two_lattices
from cps.geometry import Box
from cps.scheme import SchemeBasis, dual_basis, star_many
from cps.windows import WindowUnion, covariogram, difference_window

pytestmark = pytest.mark.slow

SQRT5 = math.sqrt(5.0)
FIBONACCI = SchemeBasis(1, 1, [[1.0, TAU], [1.0, 1.0 - TAU]], name="fibonacci")
UNIT = WindowUnion.interval(0.0, 1.0)


@pytest.fixture(scope="module")
def unit_context():
    """Unit comb reaching 2R = 8000, verified at R = 4000 on [0, 20]"""
    comb = unit_comb(model_set(FIBONACCI, UNIT, Box.centered(8000.0, 1)))
    return vf.build_context(comb, ac.OracleKind.full_modelset(), 4000.0, Box((0.0,), (20.0,)))


def test_covariogram_law():
    comb = unit_comb(model_set(FIBONACCI, UNIT, Box.centered(5000.0, 1)))
    coeffs = ac.autocorrelation(comb, 5000.0, max_lag=10.0).coefficients
    expected = covariogram(UNIT, star_many(FIBONACCI, coeffs.keys)) / SQRT5
    origin = coeffs.get((0, 0)).real
    assert np.max(np.abs(coeffs.values - expected)) <= 0.02 * origin


def test_support_containment():
    patch = model_set(FIBONACCI, UNIT, Box.centered(1000.0, 1))
    for comb in (unit_comb(patch), comb_bernoulli(patch, 0.5, 42)):
        gamma = ac.autocorrelation(comb, 1000.0)
        assert ac.support_check(gamma, FIBONACCI, UNIT).violations == 0
    bad = adversarial_comb(model_set(FIBONACCI, UNIT, Box.centered(200.0, 1)))
    gamma = ac.autocorrelation(bad, 200.0)
    assert ac.support_check(gamma, FIBONACCI, UNIT).violations >= 1


def test_bernoulli_null_mean_decay():
    radii = tuple(250.0 * 2 ** n for n in range(6))
    comb = comb_bernoulli(model_set(FIBONACCI, UNIT, Box.centered(radii[-1], 1)), 0.5, 42)
    seq = ac.VanHoveSequence(1, radii)
    means = ac.finite_volume_null_means(comb, ac.OracleKind.bernoulli(0.5), seq)
    assert all(b < a for a, b in zip(means[1:-1], means[2:]))
    assert means[-1] < Config.NULL_MEAN_DECAY_RATIO * means[0]
    # pair noise falls like R^(-1/2): about 2^(-5/2) over five doublings
    assert means[-1] > 0.1 * means[0]


def test_counterexample_fixtures():
    seq = ac.VanHoveSequence(1, (1250.0, 2500.0, 5000.0, 10000.0))
    assert ac.null_mean(integers_minus_shifts(10000.0), seq)[-1] == pytest.approx(2.0, rel=0.05)
    mu = two_lattices(1000.0)
    defects = [ac.norm_ap_defect(mu, (n, 0, 0), 1000.0) for n in range(1, 51)]
    assert min(defects) >= 1.0


def test_lipschitz_bound(unit_context):
    result = vf.claim_lipschitz(unit_context, epsilons=[0.1, 0.5])
    assert result.status == vf.PASS
    reports = unit_context.extras['lipschitz']
    assert [r.eps for r in reports] == [0.1, 0.5]
    assert all(len(r.table) == 100 for r in reports)


def test_eps_dual_certified_and_relatively_dense():
    dual = dual_basis(FIBONACCI)
    diff = difference_window(UNIT)
    covering = []
    for radius in (40.0, 80.0):
        box = Box.centered(radius, 1)
        members = df.eps_dual_characters(dual, diff, 0.5, box.scaled(1.5))
        assert members.certified_points > 0
        covering.append(df.covering_radius(members.frequencies, box))
    assert np.isfinite(covering[0])
    assert abs(covering[1] - covering[0]) <= 0.2 * covering[0]


def test_bragg_peaks_above_noise(unit_context):
    level = Config.INTENSITY_THRESHOLD_FACTOR * unit_context.floor.level
    top = unit_context.spectrum.top(10)
    assert top.intensities.min() > level
    result = vf.claim_bragg_dense(unit_context)
    assert result.measured < Config.BRAGG_COVERING_BOUND


def test_intensity_estimators_agree(unit_context):
    for entry in unit_context.spectrum.top(10).entries:
        via = df.intensity_via_autocorr(unit_context.gamma, entry.frequency, 2000.0, key=entry.key)
        assert via == pytest.approx(entry.intensity, rel=0.05)


def test_bernoulli_residual_level():
    R = 2000.0
    patch = model_set(FIBONACCI, UNIT, Box.centered(R, 1))
    guard = Config.GUARD_FACTOR / (2.0 * R)
    grid = df.residual_grid(Box((0.0,), (5.0,)), 2000)
    levels = []
    for seed in range(20):
        comb = comb_bernoulli(patch, 0.5, seed)
        peaks = df.bragg_candidates(dual_basis(FIBONACCI), UNIT, None, Box((-0.5,), (5.5,)),
                                    internal_cutoff=vf.residual_cutoff(comb, guard))
        bins = df.continuous_residual(comb, grid, R, peaks.frequencies, guard=guard)
        levels.append(np.mean([level for _, level in bins]))
    assert np.mean(levels) == pytest.approx(0.25 / SQRT5, rel=0.15)


def test_decomposition_algebra():
    R = 2000.0
    comb = comb_bernoulli(model_set(FIBONACCI, UNIT, Box.centered(R, 1)), 0.5, 42)
    parts = ac.decompose(ac.autocorrelation(comb, R), ac.OracleKind.bernoulli(0.5))
    assert np.max(np.abs(parts.gamma_S.values + parts.gamma_0.values - parts.gamma.values)) <= 1e-12
    assert np.all(parts.gamma_S.values.real >= -1e-12)

    periods = ac.almost_period_candidates(FIBONACCI)
    inner = ac.VanHoveSequence(1, tuple(R * f for f in (0.125, 0.25, 0.5, 1.0)))
    assert ac.uniqueness_check(parts.gamma, parts.gamma_S, parts.gamma_0, inner, periods, R)
    assert not ac.uniqueness_check(parts.gamma, parts.gamma_0, parts.gamma_S, inner, periods, R)
