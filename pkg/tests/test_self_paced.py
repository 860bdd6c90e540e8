import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import grid_mixture_weight
from splr.self_paced import (
    PaceParams,
    update_weights,
    weight_hard,
    weight_linear,
    weight_mixture,
)


def test_hard():
    assert weight_hard(0.1, 1) == 1
    assert weight_hard(1, 1) == 0
    assert weight_hard(5, 1) == 0


def test_linear():
    assert weight_linear(0, 2) == 1
    assert weight_linear(1, 2) == 0.5
    assert weight_linear(2, 2) == 0


@pytest.mark.parametrize("loss, expected", [(0.5, 1.0), (4.0, 0.0), (2.25, 1 / 3)])
def test_mixture_examples(loss, expected):
    p = PaceParams(eta=2.0, gamma=2.0)
    assert weight_mixture(loss, p) == pytest.approx(expected, abs=1e-12)
    assert abs(grid_mixture_weight(loss, 2.0, 2.0) - expected) <= 1e-3


def test_mixture_zero_loss_limit():
    for gamma, eta in [(0.1, 5.0), (3.0, 0.2), (2.0, 2.0)]:
        assert weight_mixture(0.0, PaceParams(eta, gamma)) == 1.0
        assert weight_mixture(1e-300, PaceParams(eta, gamma)) == 1.0


def test_update_weights():
    p = PaceParams(eta=2.0, gamma=2.0)
    np.testing.assert_allclose(update_weights([0.5, 2.25, 4.0], p), [1, 1 / 3, 0], atol=1e-12)
    np.testing.assert_array_equal(update_weights(np.zeros(4), p), np.ones(4))
    np.testing.assert_array_equal(update_weights([4.0, 9.0, 100.0], p), np.zeros(3))
    with pytest.raises(ValueError):
        update_weights([-1.0], p)


def test_invalid_params():
    for bad in [dict(eta=0), dict(eta=1, gamma=0), dict(eta=1, mu=0.5)]:
        with pytest.raises(ValueError):
            PaceParams(**bad)


def test_continuity_at_branch_edges():
    for gamma, eta in [(2.0, 2.0), (0.5, 3.0), (4.0, 1.5)]:
        p = PaceParams(eta, gamma)
        for edge in [(eta * gamma / (eta + gamma)) ** 2, eta**2]:
            gap = abs(weight_mixture(edge - 1e-8, p) - weight_mixture(edge + 1e-8, p))
            assert gap < 1e-6


_pos = st.floats(min_value=0.05, max_value=20.0, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 500), st.floats(0, 500), _pos, _pos)
def test_monotone_in_loss(a, b, gamma, eta):
    lo, hi = sorted((a, b))
    p = PaceParams(eta, gamma)
    assert weight_mixture(lo, p) >= weight_mixture(hi, p)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 500), _pos, _pos, _pos)
def test_monotone_in_pace(loss, gamma, e1, e2):
    lo, hi = sorted((e1, e2))
    assert weight_mixture(loss, PaceParams(lo, gamma)) <= weight_mixture(loss, PaceParams(hi, gamma)) + 1e-15
