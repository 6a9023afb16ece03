import numpy as np
import pytest

from conftest import z_comb
from cps import diffraction as df
from cps.autocorrelation import autocorrelation
from cps.combs import WeightedComb
from cps.errors import EmptySet, InnerTooLarge, RegionTooSmall
from cps.geometry import Box
from cps.scheme import dual_basis, embed_many
from cps.windows import char_deviation


def test_fourier_bohr_at_zero(fibonacci_comb):
    inside = np.abs(fibonacci_comb.patch.physical[:, 0]) <= 100.0
    assert df.fourier_bohr(fibonacci_comb, [0.0], 100.0) == pytest.approx(inside.sum() / 200.0)


def test_fourier_bohr_integers(integers, z_window):
    c = z_comb(integers, z_window, 100.5)
    assert abs(df.fourier_bohr(c, [1.0], 100.5)) == pytest.approx(1.0)
    assert abs(df.fourier_bohr(c, [0.5], 100.5)) ** 2 <= 1e-3


def test_fourier_bohr_region_too_small(fibonacci_comb):
    with pytest.raises(RegionTooSmall):
        df.fourier_bohr(fibonacci_comb, [1.0], 250.0)


def test_conjugation_symmetry(fibonacci_comb):
    ks = np.array([[0.3], [1.0], [2.7]])
    forward = df.fourier_bohr_many(fibonacci_comb, ks, 100.0)
    backward = df.fourier_bohr_many(fibonacci_comb, -ks, 100.0)
    assert np.allclose(backward, np.conj(forward), atol=1e-12)


def test_exact_pairing_matches_physical_phase(fibonacci, unit_window, fibonacci_comb):
    candidates = df.bragg_candidates(dual_basis(fibonacci), unit_window, None, Box((0.0,), (5.0,)),
                                     internal_cutoff=5.0)
    assert len(candidates) > 0
    exact = df.fourier_bohr_many(fibonacci_comb, candidates.frequencies, 100.0, keys=candidates.keys)
    plain = df.fourier_bohr_many(fibonacci_comb, candidates.frequencies, 100.0)
    assert np.allclose(exact, plain, atol=1e-8)


def test_bragg_candidates_integers(integers, z_window):
    candidates = df.bragg_candidates(dual_basis(integers), z_window, None, Box((0.0,), (3.0,)),
                                     internal_cutoff=0.5)
    assert candidates.frequencies[:, 0].tolist() == [0.0, 1.0, 2.0, 3.0]
    assert candidates.keys.tolist() == [[0, 0], [1, 0], [2, 0], [3, 0]]
    empty = df.bragg_candidates(dual_basis(integers), z_window, None, Box((1.0,), (0.0,)))
    assert len(empty) == 0


def test_spectrum_entries(integers, z_window):
    c = z_comb(integers, z_window, 100.5)
    candidates = df.bragg_candidates(dual_basis(integers), z_window, None, Box((0.0,), (3.0,)),
                                     internal_cutoff=0.5)
    spec = df.spectrum(c, candidates, 100.5)
    assert len(spec) == 4
    assert spec.method == "bohr_sum"
    assert spec.entries[1].key == (1, 0)
    assert np.allclose(spec.intensities, 1.0)
    assert len(spec.top(2)) == 2
    assert len(spec.above(2.0)) == 0


def test_noise_floor_integers(integers, z_window):
    c = z_comb(integers, z_window, 100.5)
    box = Box((0.0,), (3.0,))
    candidates = df.bragg_candidates(dual_basis(integers), z_window, None, box, internal_cutoff=0.5)
    floor = df.noise_floor(c, candidates, box, 100.5)
    assert sorted(floor.probes[:, 0].tolist()) == [0.5, 1.5, 2.5]
    assert floor.level < 1e-3


def test_eps_dual_characters_certified(fibonacci, unit_window):
    members = df.eps_dual_characters(dual_basis(fibonacci), unit_window, 0.5, Box((0.0,), (5.0,)))
    assert len(members) > 0
    assert members.certified_points > 0
    dual = dual_basis(fibonacci)
    physical, internal = embed_many(dual, members.keys)
    assert np.all(char_deviation(internal, unit_window) < 0.5)
    assert np.all((physical >= -1e-9) & (physical <= 5.0 + 1e-9))
    with pytest.raises(ValueError):
        df.eps_dual_characters(dual, unit_window, 0.0, Box((0.0,), (5.0,)))


def test_eps_dual_set_carries_its_window(fibonacci, unit_window):
    dual = dual_basis(fibonacci)
    members = df.eps_dual_characters(dual, unit_window, 0.5, Box((0.0,), (20.0,)))
    assert members.window_descriptor == members.window.descriptor
    assert members.window(embed_many(dual, members.keys)[1]).all()
    candidates = df.bragg_candidates(dual, unit_window, None, Box((0.0,), (20.0,)))
    inside = members.window(embed_many(dual, candidates.keys)[1])
    assert inside.sum() == len(members)
    assert members.nearest_first(3).window is members.window


def test_eps_dual_everything_at_two(integers, z_window):
    members = df.eps_dual_characters(dual_basis(integers), z_window, 2.0, Box((0.0,), (2.0,)))
    candidates = df.bragg_candidates(dual_basis(integers), z_window, None, Box((0.0,), (2.0,)))
    assert len(members) == len(candidates)


def test_lipschitz_zero_shift(fibonacci, unit_window, fibonacci_comb):
    gamma = autocorrelation(fibonacci_comb, 100.0)
    psis = df.bragg_candidates(dual_basis(fibonacci), unit_window, None, Box((0.0,), (3.0,)),
                               internal_cutoff=3.0).nearest_first(5)
    Gamma = df.EpsDualSet(0.1, np.zeros((1, 1)), np.zeros((1, 2), dtype=np.int64))
    report = df.lipschitz_bound_check(fibonacci_comb, gamma, Gamma, psis)
    assert report.passed
    assert all(delta == 0.0 for _, _, delta in report.table)
    assert report.C_est == pytest.approx(df.lipschitz_constant(gamma))
    with pytest.raises(ValueError):
        df.lipschitz_bound_check(fibonacci_comb, gamma, df.EpsDualSet(None, Gamma.frequencies, Gamma.keys), psis)


def test_lipschitz_fails_off_the_eps_dual_set(fibonacci, unit_window, fibonacci_comb):
    gamma = autocorrelation(fibonacci_comb, 100.0)
    psis = df.bragg_candidates(dual_basis(fibonacci), unit_window, None, Box((0.0,), (3.0,)),
                               internal_cutoff=3.0).nearest_first(5)
    rng = np.random.default_rng(3)
    Gamma = df.EpsDualSet(0.1, rng.uniform(0.3, 5.0, size=(10, 1)), None)
    report = df.lipschitz_bound_check(fibonacci_comb, gamma, Gamma, psis)
    assert report.violations > 0
    assert report.max_ratio > 1.0


def test_lipschitz_constant_integers(integers, z_window):
    gamma = autocorrelation(z_comb(integers, z_window, 10.5), 10.5)
    # the smallest box, |z| <= 1, carries the largest average
    expected = (1.0 + 2.0 * 20.0 / 21.0) / (2.0 * 10.5 / 8.0)
    assert df.lipschitz_constant(gamma, headroom=0.0) == pytest.approx(expected)


def test_intensity_via_autocorr(fibonacci_comb):
    gamma = autocorrelation(fibonacci_comb, 100.0)
    bohr = abs(df.fourier_bohr(fibonacci_comb, [0.0], 100.0)) ** 2
    via = df.intensity_via_autocorr(gamma, [0.0], 50.0)
    assert via == pytest.approx(bohr, abs=0.03)
    with pytest.raises(InnerTooLarge):
        df.intensity_via_autocorr(gamma, [0.0], 60.0)


def test_covering_radius():
    freqs = np.arange(0, 11, dtype=float).reshape(-1, 1)
    assert df.covering_radius(freqs, Box((0.0,), (10.0,))) == pytest.approx(0.5)
    with pytest.raises(EmptySet):
        df.covering_radius(np.zeros((0, 1)), Box((0.0,), (10.0,)))


def test_continuous_residual_of_zero_comb(fibonacci_patch):
    c = WeightedComb(fibonacci_patch, np.zeros(len(fibonacci_patch)))
    grid = df.residual_grid(Box((0.0,), (5.0,)), 100)
    levels = df.continuous_residual(c, grid, 100.0, np.zeros((0, 1)), bins=10)
    assert len(levels) == 10
    assert all(level == 0.0 for _, level in levels)


def test_residual_grid():
    grid = df.residual_grid(Box((0.0, 0.0), (1.0, 1.0)), 100)
    assert grid.shape == (100, 2)
