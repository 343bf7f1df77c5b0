import numpy as np
import pytest

from cslab.tables import DecreasingInverseTable, IncreasingInverseTable


def test_increasing_roundtrip():
    table = IncreasingInverseTable(lambda t: t**3, 1e-6, 1e6)
    s = np.geomspace(1e-15, 1e15, 200)
    t = np.asarray(table(s))
    assert np.max(np.abs(t**3 / s - 1.0)) < 1e-6


def test_increasing_auto_expands_range():
    table = IncreasingInverseTable(lambda t: 2.0 * t, 1.0, 10.0)
    # way outside the seeded [2, 20] value range on both sides
    assert abs(float(table(2e8)) - 1e8) < 1.0
    assert abs(float(table(2e-8)) - 1e-8) < 1e-12


def test_increasing_handles_slowly_varying_factor():
    fn = lambda t: np.sqrt(t) / np.log(np.e + t)
    table = IncreasingInverseTable(fn)
    s = np.geomspace(0.1, 1e5, 60)
    t = np.asarray(table(s))
    assert np.max(np.abs(fn(t) / s - 1.0)) < 1e-6


def test_decreasing_roundtrip_and_range():
    table = DecreasingInverseTable(lambda x: x**-1.5, 1e-4, 1e4)
    v = np.geomspace(table.v_min * 1.01, table.v_max * 0.99, 100)
    x = np.asarray(table(v))
    assert np.max(np.abs(x**-1.5 / v - 1.0)) < 1e-6


def test_increasing_rejects_nonmonotone():
    with pytest.raises(ValueError):
        IncreasingInverseTable(lambda t: 2.0 + np.sin(t), 0.1, 20.0)
    with pytest.raises(ValueError):
        IncreasingInverseTable(lambda t: t, -1.0, 2.0)
