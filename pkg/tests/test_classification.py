import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

import oracles
from infodemic.classification import (Role, RoleAssignment, RoleClassifier, behavior_summary,
                                      classify_fractions, classify_user, classify_window,
                                      fake_fraction, sensitivity_sweep)
from infodemic.errors import EmptyActivity
from infodemic.ingestion import ContentCategory, EventLog, ShareEvent

FAKE = ContentCategory.FakeHoax
REAL = ContentCategory.Science
DAY = 86400
T0 = 1_600_000_000 - 1_600_000_000 % DAY


def _log(spec):
    """``spec``: list of (day, actor, n_fake, n_real[, n_unlabeled])."""
    recs = []
    for day, actor, nf, nr, *rest in spec:
        nu = rest[0] if rest else 0
        t = T0 + day * DAY
        recs += [ShareEvent(t, actor, "src", None, FAKE)] * nf
        recs += [ShareEvent(t, actor, "src", None, REAL)] * nr
        recs += [ShareEvent(t, actor, "src", None, None)] * nu
    return EventLog.from_records(recs)


def test_fake_fraction_and_threshold_boundary():
    assert fake_fraction(10, 2) == 0.2
    assert classify_user(0.2, 0.2) is Role.Creator
    assert classify_user(0.19, 0.2) is Role.Consumer
    assert classify_user(0.0, 0.2) is Role.NonSpreader
    with pytest.raises(EmptyActivity):
        fake_fraction(0, 0)


def test_day_examples():
    log = _log([(0, "a", 2, 8), (0, "b", 1, 9), (0, "c", 0, 5)])
    roles = classify_window(log).as_dict()
    assert roles[("a", 0)] is Role.Creator
    assert roles[("b", 0)] is Role.Consumer
    assert roles[("c", 0)] is Role.NonSpreader


def test_unlabeled_counts_toward_total_only():
    log = _log([(0, "a", 2, 0, 8)])
    cell = classify_window(log).as_rows()[0]
    assert cell == ("a", 0, "Creator", 10, 2)
    log = _log([(0, "a", 1, 0, 9)])
    assert classify_window(log).as_rows()[0][2] == "Consumer"


def test_classify_fractions_vector():
    out = classify_fractions(np.array([0.0, 0.1, 0.2, 0.9]), 0.2)
    np.testing.assert_array_equal(out, [2, 1, 0, 0])


def test_behavior_summary_mixed():
    log = _log([(0, "a", 5, 5), (1, "a", 1, 9), (0, "b", 3, 0), (0, "c", 1, 9),
                (2, "c", 1, 9), (0, "d", 0, 3)])
    s = behavior_summary(classify_window(log))
    assert (s.only_creators, s.only_consumers, s.mixed) == (1, 1, 1)
    assert (s.only_creators_once, s.only_consumers_once) == (1, 0)
    f = s.fractions()
    assert sum(f[k] for k in ("only_creators", "only_consumers", "mixed")) == pytest.approx(1)


def test_full_period_window():
    log = _log([(0, "a", 1, 0), (3, "a", 0, 9)])
    a = classify_window(log, window_days=None)
    assert a.n_windows == 1
    assert a.as_rows() == [("a", 0, "Consumer", 10, 1)]


def test_multi_day_windows():
    log = _log([(0, "a", 1, 0), (1, "a", 0, 1), (2, "a", 0, 1)])
    a = classify_window(log, window_days=2)
    assert a.n_windows == 2
    assert [r[2] for r in a.as_rows()] == ["Creator", "NonSpreader"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 5, None]),
       st.sampled_from([0.1, 0.2, 0.5]))
def test_matches_oracle(seed, window_days, thr):
    rng = np.random.default_rng(seed)
    log = EventLog.from_records(oracles.random_records(rng, 80, 12, n_days=7))
    got = {(u, w): (role, t, f) for u, w, role, t, f in
           classify_window(log, thr, window_days).as_rows()}
    assert got == oracles.roles(log, thr, window_days)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.9))
def test_threshold_monotone(seed, thr):
    rng = np.random.default_rng(seed)
    log = EventLog.from_records(oracles.random_records(rng, 100, 10))
    lo = classify_window(log, thr).role
    hi = classify_window(log, min(thr + 0.1, 1.0)).role
    assert np.sum(hi == Role.Creator) <= np.sum(lo == Role.Creator)


def test_csv_roundtrip():
    log = _log([(0, "a", 5, 5), (1, "b", 1, 9)])
    a = classify_window(log)
    buf = io.StringIO()
    a.to_csv(buf)
    assert buf.getvalue().splitlines()[0] == "user,window,role,total,fake"
    back = RoleAssignment.read_csv(io.StringIO(buf.getvalue()), n_windows=a.n_windows)
    assert back.equals(a)


def test_sensitivity_sweep_sizes():
    log = _log([(0, "a", 3, 7), (0, "b", 1, 9), (0, "c", 0, 5)])
    recs = sensitivity_sweep(log, [0.05, 0.2, 0.5])
    sizes = [r.sizes for r in recs]
    assert sizes[0]["Creator"] == 2
    assert sizes[1]["Creator"] == 1
    assert sizes[2]["Creator"] == 0


def test_estimator_api():
    log = _log([(0, "a", 2, 8), (0, "b", 1, 9)])
    clf = RoleClassifier(threshold=0.2)
    assert clone(clf).get_params() == {"threshold": 0.2, "window_days": 1}
    a = clf.fit(log).assignment_
    assert a.equals(clf.transform(log))
    assert clf.summary_.only_creators == 1
    np.testing.assert_array_equal(clf.predict([0.3, 0.1, 0.0]), [0, 1, 2])


def test_threshold_one_means_all_fake():
    log = _log([(0, "a", 4, 0), (0, "b", 4, 1), (0, "c", 0, 2)])
    roles = classify_window(log, 1.0).as_dict()
    assert roles[("a", 0)] is Role.Creator
    assert roles[("b", 0)] is Role.Consumer


def test_sweep_single_threshold_matches_direct():
    from infodemic.network import build_network, group_link_density
    rng = np.random.default_rng(5)
    log = EventLog.from_records(oracles.random_records(rng, 300, 25))
    rec = sensitivity_sweep(log, [0.2])[0]
    direct = group_link_density(build_network(log), classify_window(log, 0.2, None))
    np.testing.assert_array_equal(rec.density.observed, direct.observed)
    np.testing.assert_array_equal(rec.density.ratio, direct.ratio)


def test_sweep_ratios_stable_on_planted_corpus():
    from infodemic.synthgen import PopulationParams, gen_population
    log, _ = gen_population(PopulationParams(n_creators=40, n_consumers=300,
                                             n_nonspreaders=200, seed=4))
    creators = [r.sizes["Creator"] for r in sensitivity_sweep(log, [0.1, 0.2, 0.3])]
    assert creators == sorted(creators, reverse=True)
    # thresholds inside the planted gap between consumer and creator fractions
    recs = sensitivity_sweep(log, [0.15, 0.2, 0.25, 0.3])
    ratios = np.array([r.density.ratio for r in recs])
    rel = (ratios.max(axis=0) - ratios.min(axis=0)) / ratios.mean(axis=0)
    assert np.nanmax(rel) < 0.2
