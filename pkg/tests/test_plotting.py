import pytest

from cps.diffraction import Spectrum, SpectrumEntry
from utils.plotting import stick_plot


@pytest.fixture
def small_spectrum():
    entries = [SpectrumEntry((0.0,), (0, 0), 0.2), SpectrumEntry((1.618,), (1, 0), 0.05),
               SpectrumEntry((2.5,), (2, 1), 0.0)]
    return Spectrum(entries, 100.0)


@pytest.mark.parametrize("log_scale", [False, True])
def test_stick_plot_writes_svg(tmp_path, small_spectrum, log_scale):
    path = stick_plot(small_spectrum, str(tmp_path / "spectrum.svg"), log_scale=log_scale)
    with open(path) as f:
        text = f.read()
    assert "<svg" in text


def test_stick_plot_empty_spectrum(tmp_path):
    path = stick_plot(Spectrum([], 50.0), str(tmp_path / "empty.svg"), title="nothing retained")
    with open(path) as f:
        assert "<svg" in f.read()
