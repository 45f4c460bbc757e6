import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracsob.fenchel import NonConvexError
from fracsob.psi import (DegeneratePsiError, OutsideTabulationError, PsiFunction, YoungFunction,
                         eval_psi, fundamental_function, log_fundamental_function,
                         natural_function_from_family, orlicz_from_psi, orlicz_fundamental,
                         orlicz_roundtrip, psi_from_orlicz, psi_from_text, psi_to_text,
                         tail_bound_from_psi, truncated_fundamental_function, young_from_text,
                         young_to_text)
from oracles import fundamental_dense, gaussian_abs_moment

FAMILY = [
    PsiFunction.power_pole(1, 1, 2, 4),
    PsiFunction.power_pole(0.5, 2, 1, 3),
    PsiFunction.power(1.0),
    PsiFunction.power(0.5, lower=2),
    PsiFunction.constant(1.0, 1, 2),
    PsiFunction.constant(3.0, 1.5, 6),
    PsiFunction.tabulated([1.5, 2, 4, 8], [2.0, 1.0, 1.5, 4.0]),
]


# evaluation --------------------------------------------------------------

def test_point_weight_values():
    psi = PsiFunction.point(3)
    assert eval_psi(psi, 3) == 1.0
    assert eval_psi(psi, 2) == math.inf


def test_power_weight_value():
    assert eval_psi(PsiFunction.power(2), 4) == pytest.approx(16.0)


def test_off_support_is_infinite():
    psi = PsiFunction.power_pole(1, 1, 2, 4)
    assert eval_psi(psi, 1.5) == math.inf and eval_psi(psi, 4.0) == math.inf
    assert math.isfinite(eval_psi(psi, 3.0))


def test_tabulated_outside_hull_is_distinct_error():
    psi = PsiFunction.tabulated([2, 3, 4], [1, 2, 3], lower=1, upper=10)
    with pytest.raises(OutsideTabulationError):
        eval_psi(psi, 1.5)
    assert eval_psi(psi, 11) == math.inf
    assert eval_psi(psi, 2.5) == pytest.approx(math.sqrt(2))  # log-linear midpoint


@pytest.mark.parametrize("bad", [
    lambda: PsiFunction.power_pole(1, 1, 3, 2),
    lambda: PsiFunction.power(1, lower=0.5),
    lambda: PsiFunction.constant(-1),
    lambda: PsiFunction.tabulated([1, 2], [1, 0]),
    lambda: PsiFunction.tabulated([2, 1], [1, 1]),
    lambda: PsiFunction.point(0.5),
])
def test_invalid_weights_rejected(bad):
    with pytest.raises(ValueError):
        bad()


def test_grr_scaled_weight_raises_lower_end():
    psi = PsiFunction.power(1.0).with_grr_coefficient([0.5])
    assert psi.support == (2.0, math.inf)
    assert eval_psi(psi, 4) == pytest.approx(4 * 24 * math.sqrt(2))
    with pytest.raises(DegeneratePsiError):
        PsiFunction.point(1.5).with_grr_coefficient([0.5])


# fundamental functions ----------------------------------------------------

@pytest.mark.parametrize("r", [1.5, 2.0, 5.0])
@pytest.mark.parametrize("delta", [1e-8, 1e-3, 0.25, 0.9, 1.0])
def test_point_weight_gives_lebesgue_fundamental_function(r, delta):
    assert fundamental_function(PsiFunction.point(r), delta) == pytest.approx(delta ** (1 / r),
                                                                              rel=1e-14)


def test_fundamental_examples():
    assert fundamental_function(PsiFunction.point(2), 0.25) == pytest.approx(0.5)
    assert fundamental_function(PsiFunction.constant(1, 1, 2), 0.01) == pytest.approx(0.1,
                                                                                      rel=1e-9)


@pytest.mark.parametrize("psi", FAMILY, ids=lambda p: p.kind)
@pytest.mark.parametrize("delta", [1e-6, 1e-3, 0.1, 0.7])
def test_fundamental_matches_dense_oracle(psi, delta):
    lo, hi = psi.support
    if psi.kind == "tabulated":
        lo, hi = psi.nodes[0] - 1e-12, psi.nodes[-1] + 1e-12
    hi = min(hi, 400.0)
    oracle = fundamental_dense(psi.log_value, lo, hi, delta)
    got = fundamental_function(psi, delta)
    assert got >= oracle * (1 - 1e-9)
    if math.isfinite(psi.support[1]) or psi.kind == "constant":
        # the grid oracle misses open-end limits by its spacing
        assert got == pytest.approx(oracle, rel=1e-4)


@pytest.mark.parametrize("psi", FAMILY, ids=lambda p: p.kind)
def test_fundamental_nondecreasing_in_delta(psi):
    ds = np.geomspace(1e-9, 1, 40)
    v = [fundamental_function(psi, d) for d in ds]
    assert all(b >= a * (1 - 1e-10) for a, b in zip(v, v[1:]))


def test_truncated_examples_and_monotonicity():
    psi = PsiFunction.constant(1, 1, 4)
    assert truncated_fundamental_function(psi, 2, 1e-4) == pytest.approx(0.1, rel=1e-9)
    pole = PsiFunction.power_pole(1, 1, 2, 4)
    for d in (1e-5, 0.01, 0.5):
        full = fundamental_function(pole, d)
        near = truncated_fundamental_function(pole, 2 + 1e-9, d)
        assert near == pytest.approx(full, rel=1e-6)
        vals = [truncated_fundamental_function(pole, q, d) for q in (2.2, 2.6, 3.0, 3.5)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
        assert vals[0] <= full * (1 + 1e-12)
    with pytest.raises(ValueError):
        truncated_fundamental_function(pole, 5, 0.1)


# Orlicz correspondence ---------------------------------------------------

@pytest.mark.parametrize("m", [1, 2, 4])
def test_psi_of_exponential_orlicz_band(m):
    psi = psi_from_orlicz(YoungFunction.exp_power(m), convexify=m < 2)
    p = np.linspace(max(2.0, psi.nodes[0]), 100, 50)
    ratio = psi(p) / p ** (1 / m)
    assert ratio.max() / ratio.min() < 4


def test_orlicz_from_power_weights_tail_shape():
    for beta, expect in ((0.5, 2.0), (1.0, 1.0)):
        N = orlicz_from_psi(PsiFunction.power(beta))
        u = np.geomspace(N.u_max / 10, N.u_max * 0.99, 5)
        slopes = np.diff(np.log(N.log_value(u))) / np.diff(np.log(u))
        np.testing.assert_allclose(slopes, expect, atol=0.1)


def test_orlicz_patch_is_continuous_at_three():
    N = orlicz_from_psi(PsiFunction.power(0.5))
    left, right = N.log_value(3 - 1e-9), N.log_value(3 + 1e-9)
    assert left == pytest.approx(right, abs=1e-6)
    assert N.meta["patch_constant"] == pytest.approx(math.exp(N.log_value(3.0)) / 9, rel=1e-9)


def test_orlicz_from_bounded_support_rejected():
    with pytest.raises(ValueError, match="Orlicz"):
        orlicz_from_psi(PsiFunction.power_pole(1, 1, 2, 4))


def test_orlicz_from_nonconvex_rejected():
    psi = PsiFunction.tabulated([1, 2, 3, 4, 5], [1, 10, 1.1, 10, 1.2], upper=math.inf)
    with pytest.raises(NonConvexError):
        orlicz_from_psi(psi)


@pytest.mark.parametrize("m", [1, 2])
def test_roundtrip_within_band(m):
    r = orlicz_roundtrip(PsiFunction.power(1 / m), np.geomspace(2, 100, 30))
    assert r["dropped"].size == 0
    assert np.all((r["ratio"] >= 0.25) & (r["ratio"] <= 4))


def test_tail_bound_properties():
    psi = PsiFunction.power(0.5)
    z = np.geomspace(3, 30, 12)
    b = tail_bound_from_psi(psi, 1.0, z)
    assert np.all(np.diff(b) <= 0) and np.all(b <= 2)
    k = np.polyfit(np.log(z), np.log(-np.log(b / 2)), 1)[0]
    assert k == pytest.approx(2.0, abs=0.1)
    with pytest.raises(ValueError):
        tail_bound_from_psi(psi, 1.0, 0.5)


def test_tail_bound_at_norm():
    psi = PsiFunction.power(1.0, lower=2)
    assert tail_bound_from_psi(psi, 2.0, 2.0) == pytest.approx(2.0)


@pytest.mark.parametrize("phi, delta, expect", [
    (YoungFunction.power(2), 0.25, 0.5),
    (YoungFunction.power(1), 0.1, 1.0),
    (YoungFunction.exp_power(2), 0.1, 0.1 * math.sqrt(2 * math.log(11))),
])
def test_orlicz_fundamental(phi, delta, expect):
    assert orlicz_fundamental(phi, delta) == pytest.approx(expect, rel=1e-9)


def test_young_function_invariants():
    for phi in (YoungFunction.power(3), YoungFunction.exp_power(2),
                YoungFunction.exp_mu(np.linspace(0, 5, 50), np.linspace(0, 5, 50) ** 2)):
        u = np.linspace(0, 4, 200)
        v = phi(u)
        assert v[0] == 0 and np.all(np.diff(v) > 0)
        np.testing.assert_allclose(phi(-u), v)
    with pytest.raises(ValueError):
        YoungFunction.tabulated([0, 1, 2], [0.0, 1, 2])


def test_natural_function_of_family():
    p = np.linspace(1, 10, 19)
    g1 = np.array([gaussian_abs_moment(x) ** (1 / x) for x in p])
    psi = natural_function_from_family(p, [g1, 2 * g1])
    np.testing.assert_allclose(psi(p), 2 * g1, rtol=1e-12)
    single = natural_function_from_family(p, [g1])
    np.testing.assert_allclose(single(p), g1, rtol=1e-12)
    with pytest.raises(ValueError):
        natural_function_from_family(p, [])


# serialisation ------------------------------------------------------------

@given(st.lists(st.floats(0.01, 100, allow_nan=False), min_size=2, max_size=12),
       st.floats(1.0, 3.0))
def test_tabulated_text_roundtrip(vals, start):
    nodes = start + np.cumsum(np.full(len(vals), 0.37))
    psi = PsiFunction.tabulated(nodes, vals)
    back = psi_from_text(psi_to_text(psi))
    assert np.array_equal(back.nodes, psi.nodes) and np.array_equal(back.values, psi.values)


@pytest.mark.parametrize("psi", FAMILY + [PsiFunction.point(2.5, 3.0)], ids=lambda p: p.kind)
def test_text_roundtrip_family(psi):
    back = psi_from_text(psi_to_text(psi))
    p = np.linspace(1.01, 7.9, 25)
    np.testing.assert_array_equal(back.log_value(p), psi.log_value(p))


def test_young_text_roundtrip():
    N = orlicz_from_psi(PsiFunction.power(0.5))
    back = young_from_text(young_to_text(N))
    u = np.geomspace(0.01, 100, 30)
    np.testing.assert_array_equal(back.log_value(u), N.log_value(u))
    for phi in (YoungFunction.power(2.5), YoungFunction.exp_power(3)):
        assert young_from_text(young_to_text(phi)).log_value(2.0) == phi.log_value(2.0)


def test_log_fundamental_consistent():
    psi = PsiFunction.power(2)
    assert math.exp(log_fundamental_function(psi, math.log(1e-3))) == pytest.approx(
        fundamental_function(psi, 1e-3))
