import math

import pytest

from utils.config import Config
from cps import verification as vf
from cps.autocorrelation import OracleKind
from cps.combs import InternalWeight, comb_from_internal_weight
from cps.geometry import Box


@pytest.fixture
def context(fibonacci_comb):
    return vf.build_context(fibonacci_comb, OracleKind.full_modelset(), 100.0, Box((0.0,), (5.0,)), threads=1)


def test_claim_line():
    assert vf.ClaimResult("i", vf.PASS, 0.0, 0.0).line() == "CLAIM i PASS measured=0.0 bound=0.0"
    line = vf.ClaimResult("vi", vf.NA, float('nan'), float('nan')).line()
    assert line == "CLAIM vi N-A measured=nan bound=nan"


def test_support_claim(context):
    result = vf.claim_support(context)
    assert result.status == vf.PASS
    assert result.measured == 0.0


def test_null_mean_claim_records_extras(context):
    result = vf.claim_null_mean(context)
    assert result.claim == "iii"
    assert [r for r, _ in context.extras['null_means']] == [3.125 * 2 ** n for n in range(6)]
    assert abs(context.extras['gamma_0_at_0']) < 0.02
    means = [m for _, m in context.extras['null_means']]
    assert result.measured == pytest.approx(means[-1] / means[0])
    assert result.bound == Config.NULL_MEAN_DECAY_RATIO


def test_null_mean_claim_needs_decay(context, monkeypatch):
    # small enough in absolute terms, but flat from the second radius on
    monkeypatch.setattr(vf.ac, "finite_volume_null_means", lambda *a, **k: [0.008, 0.001, 0.001, 0.001, 0.001, 0.001])
    assert vf.claim_null_mean(context).status == vf.FAIL
    monkeypatch.setattr(vf.ac, "finite_volume_null_means", lambda *a, **k: [0.008, 0.004, 0.003, 0.002, 0.0015, 0.001])
    assert vf.claim_null_mean(context).status == vf.PASS
    monkeypatch.setattr(vf.ac, "finite_volume_null_means", lambda *a, **k: [0.004, 0.004, 0.003, 0.002, 0.0015, 0.0012])
    result = vf.claim_null_mean(context)
    assert result.status == vf.FAIL
    assert result.measured == pytest.approx(0.3)


def test_norm_almost_periodic_needs_room(context):
    # the shortest almost periods of the golden-mean scheme exceed R = 100
    assert vf.claim_norm_almost_periodic(context).status == vf.NA


def test_positive_bragg_not_applicable_to_complex_weights(fibonacci_patch):
    comb = comb_from_internal_weight(fibonacci_patch, InternalWeight.complex_phase(0.3))
    ctx = vf.build_context(comb, OracleKind.internal_function(InternalWeight.complex_phase(0.3)), 100.0,
                           Box((0.0,), (5.0,)), threads=1)
    result = vf.claim_positive_bragg(ctx)
    assert result.status == vf.NA
    assert math.isnan(result.measured)


def test_run_claims_order(context):
    results = vf.run_claims(context, epsilons=[0.5])
    assert [r.claim for r in results] == ["i", "ii", "iii", "v", "vi", "vii", "viii", "ix"]
    assert all(r.status in (vf.PASS, vf.FAIL, vf.NA) for r in results)
    assert results[0].status == vf.PASS


@pytest.mark.parametrize("first, second, status, measured, bound", [
    ([0.4, 0.4], [0.1, 0.1], vf.PASS, 0.25, 1.0 / 1.5),
    ([0.2, 0.2], [0.2, 0.19], vf.PASS, 0.195 / 0.19, 2.0),
    ([0.2, 0.2], [0.3, 0.05, 0.3], vf.FAIL, 6.0, 2.0),
])
def test_continuous_claim_passes_below_bound(context, monkeypatch, first, second, status, measured, bound):
    levels = iter([first, second])
    monkeypatch.setattr(vf, "residual_levels", lambda *a, **k: next(levels))
    result = vf.claim_continuous(context)
    assert result.status == status
    assert result.measured == pytest.approx(measured)
    assert result.bound == pytest.approx(bound)
    assert (result.measured <= result.bound) == (status == vf.PASS)


def test_covering_claim_reports_relative_change(context, monkeypatch):
    radii = iter([2.0, 2.3])
    monkeypatch.setattr(vf.df, "covering_radius", lambda *a, **k: next(radii))
    passed = vf.ClaimResult("viii", vf.PASS, 0.5, 1.0)
    result = vf.claim_sup_almost_periodic(context, passed)
    assert result.measured == pytest.approx(0.15)
    assert result.bound == Config.COVERING_STABILITY
    assert result.status == vf.PASS
    radii = iter([2.0, 2.6])
    assert vf.claim_sup_almost_periodic(context, passed).status == vf.FAIL
