from fractions import Fraction

import numpy as np
import pytest

from cps.autocorrelation import VanHoveSequence, norm_ap_defect, null_mean
from cps.combs import comb_support_check, model_set
from cps.errors import EmptySet
from cps.fixtures import adversarial_comb, integers_minus_shifts, two_lattices
from cps.geometry import Box


def test_two_lattices_positions():
    mu = two_lattices(3.0)
    positions = mu.positions[:, 0]
    assert np.all(np.diff(positions) >= 0)
    assert mu.get((0, 0, 1)) == 1.0
    assert mu.get((2, 0, 0)) == 1.0
    assert np.sum(np.isclose(positions, np.round(positions))) == 7


def test_two_lattices_not_norm_almost_periodic():
    mu = two_lattices(1000.0)
    for n in (1, 2, 7, 50):
        assert norm_ap_defect(mu, (n, 0, 0), 1000.0) >= 1.0


def test_integers_minus_shifts_atoms():
    nu = integers_minus_shifts(5.0)
    # n = 1 and n = -1 both land on 0
    assert nu.get((Fraction(0),)) == -1.0
    assert nu.get((Fraction(2),)) == 1.0
    assert nu.get((Fraction(3, 2),)) == -1.0
    assert nu.get((Fraction(-3, 2),)) == -1.0


def test_integers_minus_shifts_null_mean():
    seq = VanHoveSequence(1, (1250.0, 2500.0, 5000.0, 10000.0))
    means = null_mean(integers_minus_shifts(10000.0), seq)
    assert means[-1] == pytest.approx(2.0, rel=0.05)
    signed = integers_minus_shifts(10000.0)
    inside = signed.within(10000.0)
    assert abs(signed.values[inside].real.sum()) / 20000.0 < 0.01


def test_adversarial_comb(fibonacci, unit_window):
    patch = model_set(fibonacci, unit_window, Box.centered(100.0, 1))
    bad = adversarial_comb(patch)
    assert len(bad) == len(patch) + 1
    report = comb_support_check(bad, unit_window)
    assert report.violations >= 1
    with pytest.raises(EmptySet):
        adversarial_comb(model_set(fibonacci, unit_window, Box.centered(0.1, 1)), star_target=500.0)
