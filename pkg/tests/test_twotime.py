import math

import numpy as np
import pytest

from momentcrit.errors import GridLookupError
from momentcrit.witnesses.twotime import CorrelationGrid, w_antibunching, w_hyperbunching
from momentcrit.witnesses.verdict import CLASSICAL, NONCLASSICAL

TAUS = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)


def thermal_grid(n=1.5, taus=TAUS):
    row = [n * n * (1 + math.exp(-2 * t)) for t in taus]
    return CorrelationGrid((0.0,), taus, np.array([row]), g1=(n,), stationary=True)


def test_constant_grid():
    g = CorrelationGrid((0.0, 1.0), (0.0, 1.0), np.full((2, 2), 2.5))
    v = w_antibunching(g, 0.0, 1.0)
    assert v.value == 0.0 and v.verdict == CLASSICAL


def test_perfect_antibunching():
    g = CorrelationGrid((0.0, 1.0), (0.0, 1.0), np.array([[0.0, 1.0], [0.0, 0.0]]))
    v = w_antibunching(g, 0.0, 1.0)
    assert v.value == -1.0
    assert v.verdict == NONCLASSICAL


@pytest.mark.parametrize("tau", TAUS)
def test_thermal_bunching_classical(tau):
    v = w_antibunching(thermal_grid(), 0.0, tau)
    assert v.value >= 0.0 and v.verdict == CLASSICAL


def test_stationary_ignores_t():
    g = thermal_grid()
    assert w_antibunching(g, 7.0, 0.5).value == w_antibunching(g, 0.0, 0.5).value


def test_missing_sample_named():
    g = CorrelationGrid((0.0,), (0.0, 1.0), np.array([[1.0, 1.0]]))
    with pytest.raises(GridLookupError, match=r"\(1\.0, 0\.0\)"):
        w_antibunching(g, 0.0, 1.0)


def test_hyperbunching_needs_g1():
    g = CorrelationGrid((0.0,), (0.0, 1.0), np.array([[2.0, 1.0]]), stationary=True)
    with pytest.raises(GridLookupError):
        w_hyperbunching(g, 0.0, 1.0)


@pytest.mark.parametrize("tau", TAUS[1:])
def test_hyperbunching_paths_agree(tau):
    v = w_hyperbunching(thermal_grid(), 0.0, tau)
    assert v.determinants["d_2x2"] == pytest.approx(v.determinants["d_3x3"], abs=1e-9)
    assert v.verdict == CLASSICAL


def test_hyperbunching_violation():
    # covariance matrix [[1, 2], [2, 1]] has determinant -3
    g = CorrelationGrid((0.0,), (0.0, 1.0), np.array([[2.0, 3.0]]), g1=(1.0,), stationary=True)
    v = w_hyperbunching(g, 0.0, 1.0)
    assert v.value == pytest.approx(-3.0)
    assert v.verdict == NONCLASSICAL


@pytest.mark.parametrize("bad", [
    dict(times=(), taus=(0.0,), g2=np.zeros((0, 1))),
    dict(times=(0.0,), taus=(0.0,), g2=np.zeros((2, 1))),
    dict(times=(0.0,), taus=(0.0,), g2=np.array([[np.nan]])),
    dict(times=(0.0,), taus=(0.0,), g2=np.array([[-1.0]])),
    dict(times=(0.0,), taus=(0.0,), g2=np.array([[1.0]]), g1=(1.0, 2.0)),
])
def test_grid_validation(bad):
    with pytest.raises(ValueError):
        CorrelationGrid(**bad)
