import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracsob.fenchel import (NonConvexError, biconjugate, conjugate_brute, conjugate_linear,
                             is_convex, lower_hull, slope_range, young_fenchel)
from oracles import brute_conjugate


def _convex_samples(seed, n):
    rng = np.random.default_rng(seed)
    y = np.sort(rng.uniform(-5, 5, n))
    y = np.unique(y)
    slopes = np.sort(rng.normal(0, 3, y.size - 1))
    g = rng.normal() + np.concatenate([[0.0], np.cumsum(slopes * np.diff(y))])
    return y, g


@given(st.integers(0, 10_000), st.integers(3, 200))
def test_linear_equals_brute_on_convex_samples(seed, n):
    y, g = _convex_samples(seed, n)
    lo, hi = slope_range(y, g)
    x = np.linspace(lo, hi, 97)
    a = conjugate_linear(y, g, x)
    b = conjugate_brute(y, g, x)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-9 * (1 + np.abs(b).max()))
    np.testing.assert_allclose(a, brute_conjugate(y, g, x), rtol=0,
                               atol=1e-9 * (1 + np.abs(b).max()))


@given(st.integers(0, 10_000), st.integers(3, 120))
def test_linear_equals_brute_on_arbitrary_samples(seed, n):
    rng = np.random.default_rng(seed)
    y = np.unique(rng.uniform(-3, 3, n))
    if y.size < 2:
        return
    g = rng.normal(size=y.size)
    lo, hi = slope_range(y, g)
    x = np.linspace(lo, hi, 41)
    np.testing.assert_allclose(conjugate_linear(y, g, x), brute_conjugate(y, g, x),
                               atol=1e-9 * (1 + np.abs(g).max() + 3 * np.abs(x).max()))


@given(st.integers(0, 10_000), st.integers(3, 150))
def test_biconjugate_recovers_convex_samples(seed, n):
    y, g = _convex_samples(seed, n)
    np.testing.assert_allclose(biconjugate(y, g), g, atol=1e-9 * (1 + np.abs(g).max()))


@given(st.integers(0, 10_000), st.integers(3, 150))
def test_conjugate_is_convex(seed, n):
    y, g = _convex_samples(seed, n)
    lo, hi = slope_range(y, g)
    x = np.unique(np.linspace(lo, hi, 60))
    if x.size < 3:
        return
    assert is_convex(x, conjugate_linear(y, g, x), rtol=1e-8)


def test_biconjugate_of_nonconvex_is_hull():
    y = np.linspace(-2, 2, 401)
    g = (y ** 2 - 1) ** 2
    gss = biconjugate(y, g)
    assert np.all(gss <= g + 1e-12)
    assert np.allclose(gss[np.abs(y) <= 1], 0.0, atol=1e-12)


def test_quadratic_conjugate_closed_form():
    y = np.linspace(-10, 10, 20001)
    x = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(young_fenchel(lambda t: t ** 2 / 2, x, y), x ** 2 / 2, atol=1e-6)


def test_outside_slope_range_is_infinite():
    y = np.linspace(0, 1, 11)
    g = y ** 2
    assert np.isinf(conjugate_linear(y, g, [-1.0, 3.0])).all()
    assert np.isfinite(conjugate_linear(y, g, [-1.0], closed=(True, False))).all()


def test_nonconvex_rejected_when_checked():
    y = np.linspace(-1, 1, 21)
    with pytest.raises(NonConvexError):
        young_fenchel(-y ** 2, 0.0, y)


def test_hull_endpoints_and_order():
    y = np.array([0.0, 1.0, 2.0, 3.0])
    g = np.array([0.0, 5.0, 1.0, 0.0])
    idx = lower_hull(y, g)
    assert idx[0] == 0 and idx[-1] == 3 and 1 not in idx


def test_input_validation():
    with pytest.raises(ValueError):
        conjugate_linear([0.0, 0.0], [1.0, 2.0], [0.0])
    with pytest.raises(ValueError):
        conjugate_linear([0.0], [1.0], [0.0])


def test_absolute_value_conjugate_is_indicator():
    y = np.linspace(-50, 50, 10001)
    assert young_fenchel(np.abs(y), 0.5, y) == pytest.approx(0.0, abs=1e-12)
    assert young_fenchel(np.abs(y), 2.0, y) == np.inf


def test_exponential_conjugate():
    y = np.linspace(-20, 5, 200001)
    val = young_fenchel(np.exp, 2.0, y)
    assert val == pytest.approx(2 * np.log(2) - 2, abs=1e-8)
    assert young_fenchel(np.exp, 2.0, y, method="brute") == pytest.approx(val, abs=1e-9)
