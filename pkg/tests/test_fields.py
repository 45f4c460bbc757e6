import math

import numpy as np
import pytest

from fracsob.fields import (MCConfig, MomentEstimate, PreconditionError, RandomFieldModel,
                            fit_power_law, gap_ladder, gaussian_abs_moment, mc_gap_moments,
                            mc_rectangle_moment, path_moduli, sample_path, sample_paths,
                            sheet_rectangle_moduli, tail_report, theta_natural, thm41_experiment,
                            thm42_experiment)
from fracsob.grid import GridFunction, rectangle_modulus_table
from oracles import BM_THETA_A04_P4, GAUSS_ABS_MOMENT_16
from oracles import gaussian_abs_moment as abs_moment_oracle

BM = RandomFieldModel("brownian_motion", n=1025, seed=7)


def test_model_validation():
    with pytest.raises(ValueError):
        RandomFieldModel("fractional_brownian_motion", n=65)
    with pytest.raises(ValueError):
        RandomFieldModel("brownian_sheet", n=2 ** 11 + 1)
    with pytest.raises(ValueError):
        RandomFieldModel("levy", n=65)
    assert RandomFieldModel("brownian_sheet", n=33).d == 2


def test_reproducible_and_anchored():
    a = sample_paths(BM, 5)
    b = sample_paths(BM, 5)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(sample_path(BM, 3).values, a[3])
    np.testing.assert_array_equal(sample_paths(BM, 2, start=3), a[3:5])
    assert np.all(a[:, 0] == 0)
    other = sample_paths(RandomFieldModel("brownian_motion", n=1025, seed=8), 1)
    assert not np.array_equal(other[0], a[0])
    sheet = sample_paths(RandomFieldModel("brownian_sheet", n=17, seed=1), 2)
    assert np.all(sheet[:, 0, :] == 0) and np.all(sheet[:, :, 0] == 0)


def test_brownian_motion_marginals():
    v = sample_paths(RandomFieldModel("brownian_motion", n=65, seed=3), 10_000)
    assert np.var(v[:, -1]) == pytest.approx(1.0, abs=0.05)
    # disjoint increments are uncorrelated
    r = np.corrcoef(v[:, 32] - v[:, 0], v[:, 64] - v[:, 32])[0, 1]
    assert abs(r) < 0.04


def test_fbm_covariance():
    m = RandomFieldModel("fractional_brownian_motion", n=129, seed=2, hurst=0.7)
    v = sample_paths(m, 8000)
    s, t = 0.25, 0.75
    emp = np.mean(v[:, 32] * v[:, 96])
    expect = 0.5 * (s ** 1.4 + t ** 1.4 - (t - s) ** 1.4)
    assert emp == pytest.approx(expect, abs=0.03)


def test_gaussian_abs_moment():
    assert gaussian_abs_moment(16) == pytest.approx(GAUSS_ABS_MOMENT_16, rel=1e-12)
    for p in (1.0, 2.5, 7.3):
        assert gaussian_abs_moment(p) == pytest.approx(abs_moment_oracle(p), rel=1e-9)


def test_rectangle_moment_within_standard_errors():
    pairs = np.array([[0, 256], [100, 612], [0, 1024]])
    est = mc_rectangle_moment(BM, 2.0, pairs, 4000)
    for e, (a, b) in zip(est, pairs):
        assert abs(e.estimate - (b - a) * BM.h) <= 3 * e.stderr + 1e-12
    with pytest.raises(IndexError):
        mc_rectangle_moment(BM, 2.0, [[0, 5000]], 200)


def test_moment_estimate_validation():
    with pytest.raises(ValueError):
        MomentEstimate(1.0, 0.1, 50, 2.0)
    with pytest.raises(ValueError):
        MomentEstimate(1.0, math.inf, 500, 2.0)


@pytest.mark.parametrize("H", [0.3, 0.5, 0.8])
def test_fbm_increment_exponent(H):
    m = RandomFieldModel("fractional_brownian_motion", n=1025, seed=4, hurst=H)
    gaps = gap_ladder(m.n, 2.0, top=128)
    est = mc_gap_moments(m, 2.0, gaps, MCConfig(n_paths=400))
    y = [e.estimate for e in est[:, 0]]
    k, c = fit_power_law(gaps * m.h, y)
    assert k == pytest.approx(2 * H, abs=0.05)
    assert c == pytest.approx(1.0, rel=0.1)


def test_theta_brownian_motion():
    m = RandomFieldModel("brownian_motion", n=4097, seed=11)
    th = theta_natural(m, 0.4, [4.0], MCConfig(n_paths=1000))
    assert th.values[0] == pytest.approx(BM_THETA_A04_P4, rel=0.03)
    div = theta_natural(BM, 0.6, [2.0, 4.0], MCConfig(n_paths=200))
    assert div.flags["divergent_p"] == [2.0, 4.0] and div.psi is None
    with pytest.raises(ValueError):
        theta_natural(BM, 0.4, [2.0], MCConfig(n_paths=200))


def test_sheet_moduli_match_brute_table():
    v = sample_paths(RandomFieldModel("brownian_sheet", n=17, seed=5), 1)[0]
    gaps = np.array([[1, 1], [2, 5], [8, 3], [16, 16]])
    T = rectangle_modulus_table(GridFunction(v), (16, 16))
    np.testing.assert_allclose(sheet_rectangle_moduli(v, gaps), [T[tuple(g)] for g in gaps],
                               rtol=0, atol=1e-14)


def test_sheet_increments():
    m = RandomFieldModel("brownian_sheet", n=17, seed=6)
    v = sample_paths(m, 4000)
    a = v[:, 8, 8] - v[:, 0, 8] - v[:, 8, 0] + v[:, 0, 0]
    b = v[:, 16, 16] - v[:, 8, 16] - v[:, 16, 8] + v[:, 8, 8]
    assert np.var(a) == pytest.approx(0.25, rel=0.08)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


@pytest.mark.parametrize("c", [1 / 4, 1 / 16])
def test_brownian_self_similarity(c):
    v = sample_paths(RandomFieldModel("brownian_motion", n=257, seed=9), 6000)
    small = v[:, int(256 * c)] / math.sqrt(c)
    assert np.var(small) == pytest.approx(np.var(v[:, -1]), rel=0.08)


def test_workers_do_not_change_results():
    gaps = [1, 4, 16]
    one = mc_gap_moments(BM, [2.0, 6.0], gaps, MCConfig(n_paths=200, workers=1, chunk=50))
    two = mc_gap_moments(BM, [2.0, 6.0], gaps, MCConfig(n_paths=200, workers=2, chunk=50))
    assert [e.estimate for e in one.ravel()] == [e.estimate for e in two.ravel()]
    om1 = path_moduli(BM, [[0.1], [0.01]], MCConfig(n_paths=120, workers=1))
    om2 = path_moduli(BM, [[0.1], [0.01]], MCConfig(n_paths=120, workers=2, chunk=40))
    np.testing.assert_array_equal(om1, om2)


def test_field_moment_bound_holds():
    m = RandomFieldModel("brownian_motion", n=2049, seed=12)
    mc = MCConfig(n_paths=500)
    r = thm41_experiment(m, 0.4, [2.0 ** -k for k in range(2, 9)], mc,
                         p_grid=[3.0, 4.0, 6.0, 9.0])
    assert r["holds_fraction"] == 1.0
    assert all(row["slack"] >= 1 for row in r["rows"])
    assert 0.4 - 1 / r["A"] - 0.02 <= r["bound_exponent"] <= 0.4 + 0.02


def test_log_normalised_moduli_and_precondition():
    m = RandomFieldModel("brownian_motion", n=2049, seed=13)
    mc = MCConfig(n_paths=300)
    grid = [2.0 ** -k for k in range(4, 10)]
    # E|increment|**4 = 3 |gap|**2, so K below 3 must be rejected
    with pytest.raises(PreconditionError):
        thm42_experiment(m, 4.0, [1.0], 1.0, grid, mc)
    r = thm42_experiment(m, 4.0, [1.0], 3.0, grid, mc)
    assert r["moment_fit_exponent"][0] == pytest.approx(2.0, abs=0.05)
    assert r["R_ratio"] < 10
    with pytest.raises(ValueError):
        thm42_experiment(m, 4.0, [1.0], 3.0, [0.5], mc)


def test_tail_report_valid():
    m = RandomFieldModel("brownian_motion", n=1025, seed=14)
    mc = MCConfig(n_paths=500)
    r = tail_report(m, 0.4, 4.0, 2.0 ** -6, mc, p_grid=[3.0, 4.0, 6.0, 9.0, 13.0])
    assert r["ok"]
    applied = [row for row in r["rows"] if row["applied"]]
    assert applied and all(0 <= row["exceedance"] <= 1 for row in applied)
    with pytest.raises(ValueError):
        tail_report(m, 0.4, 20.0, 2.0 ** -6, mc, p_grid=[3.0, 4.0, 6.0])
