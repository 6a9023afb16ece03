import math

import numpy as np
import pytest

from utils.config import Config
from cps.combs import model_set, unit_comb
from cps.geometry import Box
from cps.scheme import SchemeBasis
from cps.windows import WindowUnion

TAU = (1.0 + math.sqrt(5.0)) / 2.0


@pytest.fixture(autouse=True)
def restore_config():
    """Tests that apply overrides must not leak them"""
    snapshot = Config.snapshot()
    yield
    Config.restore(snapshot)


@pytest.fixture
def fibonacci():
    return SchemeBasis(1, 1, [[1.0, TAU], [1.0, 1.0 - TAU]], name="fibonacci")


@pytest.fixture
def integers():
    """Identity scheme: physical a, internal b"""
    return SchemeBasis(1, 1, np.eye(2), name="integers")


@pytest.fixture
def unit_window():
    return WindowUnion.interval(0.0, 1.0)


@pytest.fixture
def z_window():
    return WindowUnion.interval(-0.5, 0.5)


@pytest.fixture
def fibonacci_patch(fibonacci, unit_window):
    return model_set(fibonacci, unit_window, Box.centered(200.0, 1))


@pytest.fixture
def fibonacci_comb(fibonacci_patch):
    return unit_comb(fibonacci_patch)


def z_comb(integers, z_window, radius):
    return unit_comb(model_set(integers, z_window, Box.centered(radius, 1)))


@pytest.fixture
def box2d():
    """Product of two Fibonacci schemes, d = m = 2"""
    return SchemeBasis(2, 2, [[1.0, TAU, 0.0, 0.0], [0.0, 0.0, 1.0, TAU],
                              [1.0, 1.0 - TAU, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0 - TAU]], name="box2d")
