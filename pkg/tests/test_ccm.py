import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

import oracles
from infodemic import _kernels
from infodemic.ccm import (CCM, CcmConfig, convergence_profile, cross_map, default_library_sizes,
                           delay_embed, lagged_ccm, select_embedding_dim, surrogate_test)
from infodemic.errors import DegenerateTarget, MissingValues, SeriesTooShort
from infodemic.synthgen import CoupledMapParams, gen_coupled_logistic


def _logistic(n, seed=0):
    return gen_coupled_logistic(CoupledMapParams(n=n, seed=seed))


def test_embed_small_example():
    m = delay_embed([1, 2, 3, 4, 5], 2, 1)
    np.testing.assert_array_equal(m.points, [[2, 1], [3, 2], [4, 3], [5, 4]])
    m = delay_embed(np.arange(10.0), 3, 2)
    assert m.points.shape == (6, 3)
    np.testing.assert_array_equal(m.points[0], [4, 2, 0])


def test_embed_errors():
    with pytest.raises(SeriesTooShort):
        delay_embed(np.arange(5.0), 3, 2)
    with pytest.raises(MissingValues):
        delay_embed([1.0, np.nan, 2.0], 1)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 60), st.integers(1, 6), st.integers(1, 4))
def test_embed_point_count(n, E, tau):
    x = np.arange(float(n))
    if E > 1 and (E - 1) * tau >= n - 1:
        with pytest.raises(SeriesTooShort):
            delay_embed(x, E, tau)
        return
    m = delay_embed(x, E, tau)
    assert m.points.shape == (n - (E - 1) * tau, E)
    for c in range(E):
        np.testing.assert_array_equal(m.points[:, c], x[(E - 1) * tau - c * tau:n - c * tau])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 2), st.integers(-3, 3))
def test_cross_map_matches_oracle(seed, E, tau, td):
    rng = np.random.default_rng(seed)
    n = 60
    x = np.round(rng.random(n), 2)  # rounding makes distance ties common
    y = rng.random(n)
    cfg = CcmConfig(embedding_dim=E, tau=tau)
    L = 20
    got = cross_map(x, y, library_size=L, td=td, config=cfg).rho
    want = oracles.simplex_cross_map(x.tolist(), y.tolist(), E, tau, L, td)
    assert got == pytest.approx(want, abs=1e-10)


def test_weights_nonnegative_and_normalised():
    x, y = _logistic(300)
    M = _kernels.embed(x, 3, 1)
    idx = np.arange(M.shape[0] - 1, dtype=np.int64)
    est, nb, w = _kernels.simplex_estimates(M, y[2:].copy(), idx, idx, 4)
    assert np.all(w >= 0)
    np.testing.assert_allclose(w.sum(axis=1), 1.0)
    assert not np.any(nb == idx[:, None])


def test_zero_distance_neighbours_share_weight():
    x = np.array([0.1, 0.5, 0.1, 0.5, 0.1, 0.9, 0.3])
    y = np.arange(7.0)
    res = cross_map(x, y, config=CcmConfig(embedding_dim=1))
    assert np.all(np.isfinite(res.estimates))


def test_affine_invariance():
    x, y = _logistic(400, seed=3)
    cfg = CcmConfig(embedding_dim=2)
    r = cross_map(x, y, 200, config=cfg).rho
    assert cross_map(x, 3 * y + 5, 200, config=cfg).rho == pytest.approx(r, abs=1e-12)
    assert cross_map(2 * x - 1, y, 200, config=cfg).rho == pytest.approx(r, abs=1e-12)


def test_constant_target_raises():
    with pytest.raises(DegenerateTarget):
        cross_map(np.random.default_rng(0).random(50), np.ones(50),
                  config=CcmConfig(embedding_dim=2))


def test_library_below_minimum():
    x, y = _logistic(100)
    with pytest.raises(SeriesTooShort):
        cross_map(x, y, library_size=3, config=CcmConfig(embedding_dim=3))


def test_self_cross_map_smooth_series():
    t = np.arange(600)
    x = np.sin(2 * np.pi * t / 37) + 0.5 * np.sin(2 * np.pi * t / 11)
    assert cross_map(x, x, config=CcmConfig(embedding_dim=4)).rho >= 0.95


def test_select_embedding_dim_prefers_low_for_logistic():
    x, _ = _logistic(500)
    E, skills = select_embedding_dim(x)
    assert E <= 3
    assert skills.shape == (10,)


def test_default_library_ladder():
    sizes = default_library_sizes(500, 3)
    assert sizes[0] == 12 and sizes[-1] == 500
    assert list(sizes) == sorted(set(sizes))


def test_convergence_profile_needs_two_sizes():
    x, y = _logistic(200)
    with pytest.raises(ValueError):
        convergence_profile(x, y, CcmConfig(embedding_dim=2, library_sizes=(100,)))


def test_convergence_increases_for_forced_direction():
    x, y = _logistic(1000)
    # beta_xy > 0: Y drives X, so X's manifold recovers Y
    sizes = (25, 40, 60, 100, 160, 250, 400)
    prof = convergence_profile(x, y, CcmConfig(embedding_dim=2, library_sizes=sizes))
    assert prof.delta > 0.1
    assert prof.converges


def test_lagged_shift_peak():
    rng = np.random.default_rng(4)
    x, _ = _logistic(600, seed=4)
    y = np.roll(x, 2) + rng.normal(0, 1e-3, x.size)
    # E=1 so that only td=2 lands exactly on a manifold coordinate
    res = lagged_ccm(x[2:], y[2:], range(-4, 5), CcmConfig(embedding_dim=1))
    assert res.peak_td_x_xmap_y == 2


def test_lagged_identical_at_zero():
    x, _ = _logistic(400)
    res = lagged_ccm(x, x, [0], CcmConfig(embedding_dim=2))
    assert res.rho_x_xmap_y[0] > 0.99


def test_surrogate_identical_series_rejected():
    x, _ = _logistic(300)
    res = surrogate_test(x, x, CcmConfig(embedding_dim=2, n_surrogates=200))
    assert res.significant[0]
    assert res.surrogates.shape == (1, 200)


def test_surrogate_count_zero_errors():
    x, y = _logistic(100)
    with pytest.raises(ValueError):
        surrogate_test(x, y, CcmConfig(embedding_dim=2, n_surrogates=0))


def test_determinism():
    x, y = _logistic(300)
    cfg = CcmConfig(embedding_dim=2, n_surrogates=150, seed=9)
    a = surrogate_test(x, y, cfg, tds=[-1, 0, 1])
    b = surrogate_test(x, y, cfg, tds=[-1, 0, 1])
    np.testing.assert_array_equal(a.rho, b.rho)
    np.testing.assert_array_equal(a.surrogates, b.surrogates)
    assert a.to_records() == b.to_records()


def test_estimator_api():
    x, y = _logistic(400)
    est = CCM(embedding_dim=2, n_surrogates=100, seed=1)
    assert clone(est).get_params()["n_surrogates"] == 100
    est.fit(x, y)
    assert est.embedding_dim_x_ == 2
    assert est.score("x_xmap_y") > est.score("y_xmap_x")
    results = est.test(tds=[0, 1])
    assert [r.direction for r in results] == ["x_xmap_y", "y_xmap_x"]
    rows = results[0].to_records()
    assert set(rows[0]) == {"direction", "td", "L", "rho", "surrogate_p95", "significant"}
