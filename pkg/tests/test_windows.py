import math

import numpy as np
import pytest

from cps.windows import (WindowBox, WindowUnion, char_deviation, covariogram, difference_window, eps_dual_member,
                         eps_dual_window, strictly_inside, volume)


def union(*pairs):
    return WindowUnion.from_pairs([[p] for p in pairs])


def test_volume():
    assert volume(WindowUnion.interval(0, 1)) == 1.0
    assert volume(union((0, 1), (2, 3.5))) == pytest.approx(2.5)
    assert volume(WindowUnion.from_pairs([[[0, 1], [0, 1]]])) == pytest.approx(1.0)


def test_normalization_merges_overlaps():
    W = union((0, 1), (0.5, 2), (3, 4))
    assert [(b.lo[0], b.hi[0]) for b in W.boxes] == [(0.0, 2.0), (3.0, 4.0)]
    assert volume(W) == pytest.approx(3.0)


def test_normalization_2d_overlap():
    W = WindowUnion.from_pairs([[[0, 1], [0, 1]], [[0.5, 1.5], [0, 1]]])
    assert volume(W) == pytest.approx(1.5)


def test_covariogram_examples():
    W = WindowUnion.interval(0, 1)
    assert covariogram(W, [0.0]) == pytest.approx(1.0)
    assert covariogram(W, [0.5]) == pytest.approx(0.5)
    assert covariogram(W, [1.5]) == 0.0
    assert covariogram(union((0, 1), (2, 3)), [2.0]) == pytest.approx(1.0)


def test_covariogram_brute_force():
    W = union((0, 1), (2, 3))
    u = np.arange(-1.0, 4.0, 1e-4) + 5e-5
    member = lambda v: ((v >= 0) & (v <= 1)) | ((v >= 2) & (v <= 3))
    brute = np.sum(member(u) & member(u - 2.0)) * 1e-4
    assert covariogram(W, [2.0]) == pytest.approx(brute, abs=1e-3)


def test_covariogram_symmetry_and_bounds():
    W = WindowUnion.from_pairs([[[0, 1], [0, 2]], [[2, 3], [-1, 0]]])
    rng = np.random.default_rng(0)
    t = rng.uniform(-4, 4, size=(100, 2))
    forward = covariogram(W, t)
    backward = covariogram(W, -t)
    assert np.allclose(forward, backward, atol=1e-12)
    assert np.all(forward >= 0) and np.all(forward <= volume(W) + 1e-12)
    outside, _ = difference_window(W).contains(t, eta=0.0)
    assert np.all(forward[~outside] == 0.0)


def test_difference_window():
    assert [(b.lo, b.hi) for b in difference_window(WindowUnion.interval(0, 1)).boxes] == [((-1.0,), (1.0,))]
    D = difference_window(union((0, 1), (3, 4)))
    assert [(b.lo[0], b.hi[0]) for b in D.boxes] == [(-4.0, -2.0), (-1.0, 1.0), (2.0, 4.0)]
    square = difference_window(WindowUnion.from_pairs([[[0, 1], [0, 1]]]))
    assert [(b.lo, b.hi) for b in square.boxes] == [((-1.0, -1.0), (1.0, 1.0))]


def test_difference_window_contains_differences():
    W = union((0, 1), (3, 4.5))
    rng = np.random.default_rng(1)
    samples = np.concatenate([rng.uniform(0, 1, 200), rng.uniform(3, 4.5, 200)])
    diffs = (samples[:, None] - samples[None, :]).reshape(-1, 1)
    member, _ = difference_window(W).contains(diffs, eta=0.0)
    assert member.all()


def test_char_deviation_examples():
    W = WindowUnion.interval(0, 1)
    assert char_deviation([0.0], W) == 0.0
    assert char_deviation([1.0], W) == 2.0
    assert char_deviation([0.1], W) == pytest.approx(2 * math.sin(0.1 * math.pi))


def test_char_deviation_matches_sampling():
    rng = np.random.default_rng(2)
    for _ in range(100):
        lo = rng.uniform(-2, 2)
        hi = lo + rng.uniform(0.01, 1.5)
        W = WindowUnion.interval(lo, hi)
        y = rng.uniform(-1.5, 1.5)
        w = np.linspace(lo, hi, 100001)
        sampled = np.max(np.abs(np.exp(2j * np.pi * y * w) - 1.0))
        assert char_deviation([y], W) == pytest.approx(sampled, abs=1e-8)


def test_char_deviation_matches_sampling_2d():
    rng = np.random.default_rng(4)
    for _ in range(30):
        pairs = []
        for _ in range(2):
            lo = rng.uniform(-1, 1, size=2)
            hi = lo + rng.uniform(0.05, 1.0, size=2)
            pairs.append([[lo[0], hi[0]], [lo[1], hi[1]]])
        W = WindowUnion.from_pairs(pairs)
        y = rng.uniform(-1.5, 1.5, size=2)
        sampled = 0.0
        for box in W.boxes:
            u, v = np.meshgrid(np.linspace(box.lo[0], box.hi[0], 201), np.linspace(box.lo[1], box.hi[1], 201))
            sampled = max(sampled, float(np.max(np.abs(np.exp(2j * np.pi * (y[0] * u + y[1] * v)) - 1.0))))
        exact = char_deviation(y, W)
        assert sampled <= exact + 1e-12
        assert exact == pytest.approx(sampled, abs=5e-3)


def test_eps_dual_member():
    W = WindowUnion.interval(0, 1)
    assert eps_dual_member([0.0], W, 0.3)
    assert not eps_dual_member([1.0], W, 0.5)
    assert eps_dual_member([0.01], W, 0.1)
    with pytest.raises(ValueError):
        eps_dual_member([0.0], W, 0.0)
    predicate = eps_dual_window(W, 0.1)
    assert predicate(np.array([[0.01], [0.5]])).tolist() == [True, False]


def test_contains_flags_boundary():
    W = WindowUnion.interval(0, 1, hi_closed=False)
    member, ambiguous = W.contains(np.array([[0.0], [0.5], [1.0], [1.0 + 1e-6]]))
    assert member.tolist() == [True, True, True, False]
    assert ambiguous.tolist() == [True, False, True, False]


def test_contains_without_tolerance_respects_open_ends():
    W = WindowUnion.interval(0, 1, hi_closed=False)
    member, _ = W.contains(np.array([[0.0], [1.0]]), eta=0.0)
    assert member.tolist() == [True, False]


def test_window_box_validation():
    with pytest.raises(ValueError):
        WindowBox((1.0,), (0.0,))
    with pytest.raises(ValueError):
        WindowBox((0.0,), (np.inf,))


def test_strictly_inside():
    W = WindowUnion.interval(0, 1)
    assert strictly_inside(W, WindowUnion.interval(-0.2, 1.2), 1e-6)
    assert not strictly_inside(W, WindowUnion.interval(0, 1.2), 1e-6)
