import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from infodemic.classification import Role, classify_window
from infodemic.errors import Diverged, InvalidParams
from infodemic.ingestion import label_events
from infodemic.synthgen import (CoupledMapParams, PopulationParams, category_table,
                                gen_coupled_logistic, gen_lag_coupled, gen_population,
                                table1_params)


def test_planted_roles_recovered_small():
    log, planted = gen_population(PopulationParams(n_creators=10, n_consumers=90, seed=1))
    assert classify_window(log, 0.2).equals(planted)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 20), st.integers(0, 60), st.integers(0, 10),
       st.integers(0, 40), st.integers(2, 25))
def test_round_trip_any_population(seed, n_cre, n_con, n_mix, n_non, n_days):
    if n_cre + n_con + n_mix + n_non < 2:
        return
    p = PopulationParams(n_creators=n_cre, n_consumers=n_con, n_mixed=n_mix,
                         n_nonspreaders=n_non, n_days=n_days, seed=seed)
    log, planted = gen_population(p)
    assert classify_window(log, p.threshold).equals(planted)
    if len(log):
        assert not np.any(log.actor == log.source)


def test_same_seed_same_log():
    p = PopulationParams(seed=5)
    a, _ = gen_population(p)
    b, _ = gen_population(p)
    assert a.equals(b)
    c, _ = gen_population(PopulationParams(seed=6))
    assert not a.equals(c)


def test_mixed_users_hold_both_roles():
    log, planted = gen_population(PopulationParams(n_creators=0, n_consumers=0, n_mixed=30,
                                                   n_nonspreaders=5, seed=2))
    for u in np.unique(planted.user[planted.role != Role.NonSpreader]):
        roles = set(planted.role[planted.user == u].tolist())
        assert {Role.Creator, Role.Consumer} <= roles


def test_category_table_labels_domains():
    log, _ = gen_population(PopulationParams(seed=3))
    table = category_table()
    relabeled = label_events(log, table)
    labeled = log.category >= 0
    np.testing.assert_array_equal(relabeled.category[labeled], log.category[labeled])


def test_table1_params_are_seeded():
    a = table1_params(seed=1)
    b = table1_params(seed=1)
    assert a == b
    assert a.n_creators + a.n_consumers + a.n_mixed == 20000


@pytest.mark.parametrize("bad", [
    dict(n_creators=-1),
    dict(p_fake_consumer=0.2),
    dict(p_fake_creator=0.22),
    dict(min_daily_events=3),
    dict(n_days=0),
])
def test_invalid_population(bad):
    with pytest.raises(InvalidParams):
        gen_population(PopulationParams(**bad))


def test_coupled_map_deterministic_and_bounded():
    a = gen_coupled_logistic(CoupledMapParams(seed=3))
    b = gen_coupled_logistic(CoupledMapParams(seed=3))
    np.testing.assert_array_equal(a[0], b[0])
    assert a[0].shape == (1000,)
    assert np.all((a[0] > 0) & (a[0] < 1) & (a[1] > 0) & (a[1] < 1))


def test_uncoupled_maps_are_independent():
    x, y = gen_coupled_logistic(CoupledMapParams(beta_xy=0.0, seed=1))
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.1


def test_coupled_map_divergence():
    with pytest.raises(Diverged):
        gen_coupled_logistic(CoupledMapParams(r_x=4.2))


def test_coupled_params_validation():
    with pytest.raises(InvalidParams):
        gen_coupled_logistic(CoupledMapParams(burn_in=50))


def test_lag_coupled():
    x, y = gen_lag_coupled(lag=2)
    assert x.shape == y.shape == (1000,)
    with pytest.raises(InvalidParams):
        gen_lag_coupled(CoupledMapParams(n=10, beta_xy=0, beta_yx=0.32), lag=10)
