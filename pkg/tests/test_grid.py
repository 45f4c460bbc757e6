import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fracsob.fields import sheet_rectangle_moduli
from fracsob.grid import (FractionalIndex, GridFunction, SizeCapError, compile_expression,
                          dilate, grid_from_csv, grid_to_csv, modulus_brute,
                          modulus_of_continuity, rectangle_difference, rectangle_distance_check,
                          rectangle_modulus, rectangle_modulus_table, sample_function)


def test_sampling_examples():
    np.testing.assert_array_equal(sample_function("x", 1, 3).values, [0, 0.5, 1])
    assert np.all(sample_function(2.0, 2, 4).values == 2.0)
    assert sample_function("x**0.3", 1, 101).values[1] == pytest.approx(0.01 ** 0.3, rel=1e-15)


def test_non_finite_node_reported():
    with pytest.raises(ValueError, match="node"):
        sample_function("1/x", 1, 5)


def test_expression_whitelist():
    with pytest.raises(ValueError):
        compile_expression("__import__('os')", 1)
    with pytest.raises(ValueError):
        compile_expression("y", 1)
    f = compile_expression("sin(pi*x1)*exp(-x2)", 2)
    assert float(f(np.array(0.5), np.array(0.0))) == pytest.approx(1.0)


def test_grid_function_invariants():
    with pytest.raises(ValueError):
        GridFunction(np.array([0.0, np.nan, 1.0]))
    with pytest.raises(ValueError):
        GridFunction(np.zeros((3, 4)))
    g = GridFunction(np.zeros(5))
    assert g.h == pytest.approx(0.25) and g.d == 1 and g.n == 5


def test_fractional_index():
    idx = FractionalIndex.of([0.5, 0.25, 0.25])
    assert idx.alpha0 == 0.25 and idx.p0 == 4.0 and idx.multiplicity == 2
    with pytest.raises(ValueError):
        FractionalIndex.of([0.0, 0.5])
    with pytest.raises(ValueError):
        FractionalIndex.of([1.5])


# rectangle differences --------------------------------------------------------

def test_product_and_additive_rectangle_difference():
    n = 9
    prod = sample_function("x1*x2", 2, n)
    add = sample_function("sin(x1) + x2**2", 2, n)
    ax = prod.axis
    for x in itertools.product(range(n), repeat=2):
        for y in [(0, 0), (8, 3), (4, 7), (2, 2)]:
            expect = (ax[y[0]] - ax[x[0]]) * (ax[y[1]] - ax[x[1]])
            assert rectangle_difference(prod, x, y) == pytest.approx(expect, abs=1e-15)
            assert rectangle_difference(add, x, y) == pytest.approx(0.0, abs=1e-14)


def test_factorable_identity_exhaustive():
    n = 6
    f = sample_function("exp(x1)*cos(3*x2)*x3", 3, n)
    ax = f.axis
    fk = [np.exp, lambda t: np.cos(3 * t), lambda t: t]
    for x in itertools.product(range(n), repeat=3):
        for y in itertools.product(range(0, n, 2), repeat=3):
            expect = math.prod(fk[k](ax[y[k]]) - fk[k](ax[x[k]]) for k in range(3))
            assert rectangle_difference(f, x, y) == pytest.approx(expect, abs=1e-13)


def test_smooth_identity_mixed_partial():
    n = 41
    f = sample_function("sin(x1)*sin(x2)", 2, n)
    x, y = (3, 10), (30, 37)
    a, b = f.axis[list(x)], f.axis[list(y)]
    val, _ = integrate.dblquad(lambda t2, t1: math.cos(t1) * math.cos(t2), a[0], b[0], a[1], b[1],
                               epsabs=1e-13)
    assert rectangle_difference(f, x, y) == pytest.approx(val, abs=1e-6)


def test_rectangle_difference_index_check():
    with pytest.raises(IndexError):
        rectangle_difference(sample_function("x", 1, 5), (0,), (5,))


@given(st.integers(0, 1000))
def test_rectangle_difference_is_additive(seed):
    rng = np.random.default_rng(seed)
    f = GridFunction(rng.normal(size=(6, 6)))
    g = GridFunction(rng.normal(size=(6, 6)))
    x, y = tuple(rng.integers(0, 6, 2)), tuple(rng.integers(0, 6, 2))
    assert rectangle_difference(f + g, x, y) == pytest.approx(
        rectangle_difference(f, x, y) + rectangle_difference(g, x, y), abs=1e-12)


# moduli ----------------------------------------------------------------------------

def test_modulus_examples():
    f = sample_function("x", 1, 1025)
    for k in range(1, 8):
        assert modulus_of_continuity(f, 2.0 ** -k) == pytest.approx(2.0 ** -k, abs=1e-15)
    assert modulus_of_continuity(sample_function(3.0, 1, 100), 0.3) == 0.0
    sq = sample_function("x**2", 1, 1001)
    assert modulus_brute(sq, 0.25) == pytest.approx(0.4375, abs=1e-12)
    assert modulus_of_continuity(sq, 0.25) == pytest.approx(0.4375, abs=1e-12)


@given(st.integers(0, 10_000), st.integers(2, 300), st.floats(0.0, 1.0))
def test_sliding_modulus_equals_brute_force(seed, n, delta):
    f = GridFunction(np.random.default_rng(seed).normal(size=n))
    assert modulus_of_continuity(f, delta) == modulus_brute(f, delta)


def test_modulus_at_diameter_is_range():
    rng = np.random.default_rng(3)
    f = GridFunction(rng.normal(size=200))
    assert modulus_of_continuity(f, 1.0) == pytest.approx(np.ptp(f.values))
    g = GridFunction(rng.normal(size=(12, 12)))
    assert modulus_of_continuity(g, math.sqrt(2)) == pytest.approx(np.ptp(g.values))


def test_modulus_caps():
    with pytest.raises(SizeCapError):
        modulus_brute(GridFunction(np.zeros(5000)), 0.1)
    with pytest.raises(SizeCapError):
        rectangle_modulus(GridFunction(np.zeros((100, 100))), [0.1, 0.1])


def test_rectangle_modulus_examples():
    f = sample_function("x1*x2", 2, 33)
    assert rectangle_modulus(f, [0.5, 0.5]) == pytest.approx(0.25)
    assert rectangle_modulus(sample_function("x1**2 - cos(x2)", 2, 17), [0.3, 0.7]) == \
        pytest.approx(0.0, abs=1e-14)
    g = sample_function("x**0.5", 1, 257)
    assert rectangle_modulus(g, [0.1]) == modulus_of_continuity(g, 0.1)


@given(st.integers(0, 1000))
def test_rectangle_modulus_monotone(seed):
    f = GridFunction(np.random.default_rng(seed).normal(size=(10, 10)))
    T = rectangle_modulus_table(f)
    assert np.all(np.diff(T, axis=0) >= 0) and np.all(np.diff(T, axis=1) >= 0)


@given(st.integers(0, 1000), st.integers(4, 20))
def test_sliding_sheet_modulus_equals_table(seed, n):
    v = np.random.default_rng(seed).normal(size=(n, n))
    T = rectangle_modulus_table(GridFunction(v))
    gaps = np.array([[a, b] for a in range(n) for b in range(n)])
    np.testing.assert_array_equal(sheet_rectangle_moduli(v, gaps), T[gaps[:, 0], gaps[:, 1]])


# dilation ----------------------------------------------------------------------

def test_dilation_examples():
    g = dilate("x", 0.5, 9)
    np.testing.assert_allclose(g.values[:5], g.axis[:5] / 2)
    assert g.extent == 4.0 and g.values[-1] == 0.0
    ident = dilate("x**2", 1.0, 11)
    np.testing.assert_allclose(ident.values[:6], ident.axis[:6] ** 2)
    with pytest.raises(ValueError):
        dilate("x", 0.0, 10)


# distance axioms ------------------------------------------------------------------

def test_axioms_a_and_b_hold():
    for expr, d in (("x1*x2", 2), ("sin(3*x1)*x2 + x1**2", 2), ("x1*x2*x3", 3)):
        rep = rectangle_distance_check(sample_function(expr, d, 9), 500, seed=1)
        assert not rep.nonneg_or_degenerate and not rep.symmetry


def test_triangle_property_fails_for_product():
    # exhaustive search on the 9-node lattice finds violations, e.g. the
    # corners (0,0), (1,0), (1,1): two degenerate boxes against a full one
    f = sample_function("x1*x2", 2, 9)
    pts = list(itertools.product(range(9), repeat=2))
    rho = lambda a, b: abs(rectangle_difference(f, a, b))  # noqa: E731
    assert rho((0, 0), (8, 8)) > rho((0, 0), (8, 0)) + rho((8, 0), (8, 8))
    bad = sum(rho(x, z) > rho(x, y) + rho(y, z) + 1e-12
              for x in pts[::7] for y in pts[::5] for z in pts[::3])
    assert bad > 0
    assert rectangle_distance_check(f, 2000, seed=0).triangle


def test_one_dimensional_distance_is_a_metric():
    rep = rectangle_distance_check(GridFunction(np.random.default_rng(0).normal(size=50)), 2000, 0)
    assert rep.ok


# csv ------------------------------------------------------------------------------

@pytest.mark.parametrize("d,n", [(1, 7), (2, 5), (3, 3)])
def test_csv_roundtrip(tmp_path, d, n):
    f = GridFunction(np.random.default_rng(d).normal(size=(n,) * d), extent=2.0)
    grid_to_csv(f, tmp_path / "g.csv")
    g = grid_from_csv(tmp_path / "g.csv")
    assert g.extent == 2.0
    np.testing.assert_array_equal(g.values, f.values)
