"""Creator / consumer / non-spreader roles from per-window fake-share fractions."""

import csv
import enum
import json
import os
from dataclasses import dataclass, asdict

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_fraction, check_positive_int
from .errors import EmptyActivity

DEFAULT_THRESHOLD = 0.20


class Role(enum.IntEnum):
    Creator = 0
    Consumer = 1
    NonSpreader = 2


SPREADER_ROLES = (Role.Creator, Role.Consumer)


@dataclass(frozen=True)
class ClassificationConfig:
    """``window_days=None`` uses a single window spanning the whole log."""

    threshold: float = DEFAULT_THRESHOLD
    window_days: int = 1

    def __post_init__(self):
        check_fraction(self.threshold, "threshold")
        if self.window_days is not None:
            check_positive_int(self.window_days, "window_days")


def fake_fraction(total, fake):
    """Share of a user's activity that is fake.

    Raises
    ------
    EmptyActivity
        If ``total`` is zero.
    """
    if total == 0:
        raise EmptyActivity("no shares in window")
    if total < 0 or fake < 0 or fake > total:
        raise ValueError(f"invalid counts total={total}, fake={fake}")
    return fake / total


def classify_user(fraction, threshold=DEFAULT_THRESHOLD):
    """Role for one fake-share fraction; the Creator boundary is inclusive."""
    if isinstance(threshold, ClassificationConfig):
        threshold = threshold.threshold
    check_fraction(fraction, "fraction", low_open=False)
    if fraction >= threshold:
        return Role.Creator
    if fraction > 0:
        return Role.Consumer
    return Role.NonSpreader


def classify_fractions(fractions, threshold=DEFAULT_THRESHOLD):
    """Vectorised :func:`classify_user`; returns an int8 array of Role values."""
    f = np.asarray(fractions, dtype=np.float64)
    if np.any((f < 0) | (f > 1)) or np.isnan(f).any():
        raise ValueError("fractions must lie in [0, 1]")
    roles = np.full(f.shape, Role.NonSpreader, dtype=np.int8)
    roles[f > 0] = Role.Consumer
    roles[f >= threshold] = Role.Creator
    return roles


class RoleAssignment:
    """Role per (user, window) cell with its activity counts.

    Rows are sorted by user code then window index.  Users with no activity in
    a window have no row there.
    """

    def __init__(self, user, window, total, fake, role, users, n_windows,
                 window_days=1, origin_day=0, threshold=DEFAULT_THRESHOLD):
        self.user = np.asarray(user, dtype=np.int64)
        self.window = np.asarray(window, dtype=np.int64)
        self.total = np.asarray(total, dtype=np.int64)
        self.fake = np.asarray(fake, dtype=np.int64)
        self.role = np.asarray(role, dtype=np.int8)
        self.users = np.asarray(users, dtype=object)
        self.n_windows = int(n_windows)
        self.window_days = window_days
        self.origin_day = int(origin_day)
        self.threshold = threshold

    def __len__(self):
        return self.user.shape[0]

    def __repr__(self):
        counts = np.bincount(self.role, minlength=3)
        return (f"RoleAssignment(cells={len(self)}, windows={self.n_windows}, "
                f"creator={counts[0]}, consumer={counts[1]}, nonspreader={counts[2]})")

    def as_dict(self):
        """``{(user_id, window): Role}``."""
        return {(self.users[u], int(w)): Role(r)
                for u, w, r in zip(self.user, self.window, self.role)}

    def get(self, user, window):
        codes = np.flatnonzero(self.users == user)
        if codes.size == 0:
            return None
        hit = np.flatnonzero((self.user == codes[0]) & (self.window == window))
        return Role(self.role[hit[0]]) if hit.size else None

    def static_roles(self):
        """``{user_id: Role}`` for a single-window assignment."""
        if self.n_windows != 1:
            raise ValueError("static_roles needs a single-window assignment")
        return {self.users[u]: Role(r) for u, r in zip(self.user, self.role)}

    def group_sizes(self, window=None):
        sel = self.role if window is None else self.role[self.window == window]
        c = np.bincount(sel, minlength=3)
        return {r.name: int(c[r]) for r in Role}

    def equals(self, other):
        return (self.n_windows == other.n_windows
                and self.as_rows() == other.as_rows())

    def as_rows(self):
        return [(self.users[u], int(w), Role(r).name, int(t), int(f))
                for u, w, r, t, f in zip(self.user, self.window, self.role,
                                         self.total, self.fake)]

    def to_csv(self, stream):
        if isinstance(stream, (str, os.PathLike)):
            with open(stream, "w", newline="", encoding="utf-8") as fh:
                return self.to_csv(fh)
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(("user", "window", "role", "total", "fake"))
        w.writerows(self.as_rows())

    @classmethod
    def from_rows(cls, rows, n_windows=None, window_days=1, origin_day=0,
                  threshold=DEFAULT_THRESHOLD):
        """Build from ``(user, window, role, total, fake)`` tuples; role may be a name."""
        rows = [(u, int(w), Role[r] if isinstance(r, str) else Role(r), int(t), int(f))
                for u, w, r, t, f in rows]
        users = np.array(sorted({r[0] for r in rows}), dtype=object)
        lookup = {u: i for i, u in enumerate(users)}
        rows.sort(key=lambda r: (lookup[r[0]], r[1]))
        if n_windows is None:
            n_windows = max((r[1] for r in rows), default=-1) + 1
        cols = list(zip(*rows)) if rows else [[], [], [], [], []]
        return cls([lookup[u] for u in cols[0]], cols[1], cols[3], cols[4],
                   [int(r) for r in cols[2]], users, n_windows, window_days,
                   origin_day, threshold)

    @classmethod
    def read_csv(cls, stream, n_windows=None, **kwargs):
        if isinstance(stream, (str, os.PathLike)):
            with open(stream, newline="", encoding="utf-8") as fh:
                return cls.read_csv(fh, n_windows, **kwargs)
        reader = csv.DictReader(stream)
        rows = [(r["user"], r["window"], r["role"], r["total"], r["fake"]) for r in reader]
        return cls.from_rows(rows, n_windows, **kwargs)


def classify_window(log, threshold=DEFAULT_THRESHOLD, window_days=1):
    """Assign a role to every (user, window) with at least one share.

    Unlabelled shares count toward a user's total but never toward fake.
    ``window_days=None`` classifies over one window covering the whole log.

    Returns
    -------
    RoleAssignment
    """
    if isinstance(threshold, ClassificationConfig):
        threshold, window_days = threshold.threshold, threshold.window_days
    cfg = ClassificationConfig(threshold, window_days)
    n_users = len(log.users)
    if window_days is None:
        n_windows = 1
        win = np.zeros(len(log), dtype=np.int64)
    else:
        n_windows = -(-log.n_days // window_days)
        win = log.days // window_days
    key = log.actor.astype(np.int64) * n_windows + win
    fake = log.fake
    if n_users * n_windows <= 50_000_000:
        size = n_users * n_windows
        total_c = np.bincount(key, minlength=size)
        fake_c = np.bincount(key, weights=fake, minlength=size).astype(np.int64)
        cells = np.flatnonzero(total_c)
        total, nfake = total_c[cells], fake_c[cells]
    else:
        cells, inv, total = np.unique(key, return_inverse=True, return_counts=True)
        nfake = np.bincount(inv, weights=fake, minlength=cells.size).astype(np.int64)
    role = classify_fractions(nfake / np.maximum(total, 1), cfg.threshold)
    return RoleAssignment(cells // n_windows, cells % n_windows, total, nfake, role,
                          log.users, n_windows, window_days, log.origin_day,
                          cfg.threshold)


@dataclass
class BehaviorSummary:
    """Cross-window behaviour of users who were ever a fake-spreader.

    Fractions are relative to the number of fake-spreaders; the ``*_once``
    counts are users with exactly one fake-spreader window.
    """

    only_creators: int
    only_consumers: int
    mixed: int
    only_creators_once: int
    only_consumers_once: int

    @property
    def total(self):
        return self.only_creators + self.only_consumers + self.mixed

    def fractions(self):
        t = self.total
        if t == 0:
            return {k: float("nan") for k in ("only_creators", "only_consumers", "mixed",
                                              "only_creators_once", "only_consumers_once")}
        return {
            "only_creators": self.only_creators / t,
            "only_consumers": self.only_consumers / t,
            "mixed": self.mixed / t,
            "only_creators_once": self.only_creators_once / t,
            "only_consumers_once": self.only_consumers_once / t,
        }

    def to_dict(self):
        return {"counts": asdict(self), "total": self.total, "fractions": self.fractions()}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def behavior_summary(assign):
    """Partition ever-spreaders into only-creators, only-consumers and mixed."""
    spreader = assign.role != Role.NonSpreader
    users = assign.user[spreader]
    roles = assign.role[spreader]
    n = len(assign.users)
    n_cre = np.bincount(users[roles == Role.Creator], minlength=n)
    n_con = np.bincount(users[roles == Role.Consumer], minlength=n)
    only_cre = (n_cre > 0) & (n_con == 0)
    only_con = (n_con > 0) & (n_cre == 0)
    mixed = (n_cre > 0) & (n_con > 0)
    return BehaviorSummary(
        int(only_cre.sum()), int(only_con.sum()), int(mixed.sum()),
        int((only_cre & (n_cre == 1)).sum()), int((only_con & (n_con == 1)).sum()))


@dataclass
class SweepRecord:
    threshold: float
    sizes: dict
    density: object

    def to_dict(self):
        return {"threshold": self.threshold, "sizes": self.sizes,
                "density": self.density.to_dict()}


def sensitivity_sweep(log, thresholds, null="uniform", simple=False, universe=None):
    """Static group sizes and link-density matrices for each threshold."""
    from .network import build_network, group_link_density

    net = build_network(log, simple=simple, universe=universe)
    out = []
    for thr in thresholds:
        check_fraction(thr, "threshold")
        assign = classify_window(log, thr, window_days=None)
        dm = group_link_density(net, assign, null=null)
        out.append(SweepRecord(float(thr), dm.sizes, dm))
    return out


class RoleClassifier(TransformerMixin, BaseEstimator):
    """Scikit-learn style wrapper around :func:`classify_window`.

    ``fit`` classifies an :class:`~infodemic.ingestion.EventLog` and keeps
    ``assignment_`` and ``summary_``; ``transform`` returns the assignment of
    any log; ``predict`` maps raw fake fractions to role codes.
    """

    def __init__(self, threshold=DEFAULT_THRESHOLD, window_days=1):
        self.threshold = threshold
        self.window_days = window_days

    def fit(self, X, y=None):
        self.assignment_ = classify_window(X, self.threshold, self.window_days)
        self.summary_ = behavior_summary(self.assignment_)
        return self

    def transform(self, X):
        return classify_window(X, self.threshold, self.window_days)

    def predict(self, X):
        return classify_fractions(X, self.threshold)
