import math

import pytest

from cps.errors import ConfigError
from cps.scheme import density
from data.catalog import Catalog, parse_scalar, parse_window


@pytest.fixture
def catalog():
    return Catalog()


def test_bundled_examples(catalog):
    names = catalog.names()
    assert "fibonacci" in names and "fixtures" in names
    rows = {row['name']: row for row in catalog.list_examples()}
    assert (rows['fibonacci']['d'], rows['fibonacci']['m']) == (1, 1)
    assert (rows['box2d']['d'], rows['box2d']['m']) == (2, 2)
    assert rows['fixtures']['window'] == '-'
    assert "fibonacci" in catalog.format_table()


def test_get_scheme(catalog):
    scheme = catalog.get_scheme("fibonacci")
    assert density(scheme) == pytest.approx(1.0 / math.sqrt(5.0))
    window = catalog.get_window("fibonacci")
    assert window.boxes[0].lo == (0.0,) and window.boxes[0].hi == (1.0,)
    assert catalog.is_fixture("fixtures")
    with pytest.raises(ConfigError):
        catalog.get_scheme("fixtures")
    with pytest.raises(ConfigError, match="scheme.example"):
        catalog.get("penrose")


def test_parse_scalar():
    tau = (1.0 + math.sqrt(5.0)) / 2.0
    assert parse_scalar("1-tau") == pytest.approx(1.0 - tau)
    assert parse_scalar("2*tau") == pytest.approx(2.0 * tau)
    assert parse_scalar("-sqrt2/2") == pytest.approx(-math.sqrt(2.0) / 2.0)
    assert parse_scalar(3) == 3.0
    with pytest.raises(ConfigError, match="scheme.matrix"):
        parse_scalar("__import__('os')", "scheme.matrix")
    with pytest.raises(ConfigError):
        parse_scalar(True)


def test_parse_window_closed_flags():
    W = parse_window([{"bounds": [[0, 1]], "closed": [[True], [False]]}])
    box = W.boxes[0]
    assert box.lo_closed == (True,) and box.hi_closed == (False,)
    with pytest.raises(ConfigError, match="window"):
        parse_window([])
    with pytest.raises(ConfigError, match=r"window\[0\]"):
        parse_window([[[1, 0]]])
