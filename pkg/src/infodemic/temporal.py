"""Daily group-size series, transitions and first-return times."""

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int, check_series
from .classification import Role
from .errors import AllMissing, DegenerateSeries

DEFAULT_BINS = ((0, 2), (3, 8), (9, 17), (18, 45))
STATES = ("Creator", "Consumer", "Inactive")


@dataclass
class DailySeries:
    """Per-day fractions aligned on the log window; NaN marks days with no activity.

    ``fake_fraction`` is fake shares over all shares that day; the creator and
    consumer fractions are group sizes over users active that day.
    """

    day: np.ndarray
    fake_fraction: np.ndarray
    creator_fraction: np.ndarray
    consumer_fraction: np.ndarray
    missing: np.ndarray
    n_events: np.ndarray
    n_fake: np.ndarray
    n_active: np.ndarray
    n_creators: np.ndarray
    n_consumers: np.ndarray

    COLUMNS = ("fake_fraction", "creator_fraction", "consumer_fraction")

    def __len__(self):
        return self.day.shape[0]

    def column(self, name):
        if name not in self.COLUMNS:
            raise KeyError(f"unknown series {name!r}; choose from {self.COLUMNS}")
        return getattr(self, name)

    def rescaled(self, name):
        """Min-max rescaled copy of one series, for plotting only."""
        v = self.column(name)
        lo, hi = np.nanmin(v), np.nanmax(v)
        if hi == lo:
            return np.where(np.isnan(v), np.nan, 0.0)
        return (v - lo) / (hi - lo)

    def interpolated(self, name):
        """Series with missing days linearly interpolated; returns ``(values, n_filled)``."""
        v = self.column(name)
        ok = ~np.isnan(v)
        if not ok.any():
            raise AllMissing(f"{name} has no observed days")
        out = v.copy()
        out[~ok] = np.interp(self.day[~ok], self.day[ok], v[ok])
        return out, int((~ok).sum())

    def to_csv(self, stream):
        if isinstance(stream, (str, os.PathLike)):
            with open(stream, "w", newline="", encoding="utf-8") as fh:
                return self.to_csv(fh)
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(("day", "fake_fraction", "creator_fraction", "consumer_fraction", "missing"))

        def fmt(v):
            return "" if np.isnan(v) else repr(float(v))

        for i in range(len(self)):
            w.writerow((int(self.day[i]), fmt(self.fake_fraction[i]),
                        fmt(self.creator_fraction[i]), fmt(self.consumer_fraction[i]),
                        int(self.missing[i])))


def read_series_csv(path):
    """Read a series CSV into ``{column: float array}`` (empty cells become NaN)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = {name: [] for name in reader.fieldnames}
        for row in reader:
            for k, v in row.items():
                cols[k].append(float(v) if v not in ("", None) else np.nan)
    return {k: np.array(v) for k, v in cols.items()}


def daily_series(log, assign):
    """Fake, creator and consumer fractions for each day of the log window."""
    if assign.window_days != 1:
        raise ValueError("daily_series needs an assignment with 1-day windows")
    n_days = log.n_days
    days = log.days
    n_events = np.bincount(days, minlength=n_days)[:n_days]
    n_fake = np.bincount(days, weights=log.fake, minlength=n_days)[:n_days].astype(np.int64)
    w = assign.window
    n_active = np.bincount(w, minlength=n_days)[:n_days]
    n_cre = np.bincount(w[assign.role == Role.Creator], minlength=n_days)[:n_days]
    n_con = np.bincount(w[assign.role == Role.Consumer], minlength=n_days)[:n_days]
    missing = n_events == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        fake = np.where(missing, np.nan, n_fake / np.maximum(n_events, 1))
        cre = np.where(n_active == 0, np.nan, n_cre / np.maximum(n_active, 1))
        con = np.where(n_active == 0, np.nan, n_con / np.maximum(n_active, 1))
    return DailySeries(np.arange(n_days), fake, cre, con, missing, n_events, n_fake,
                       n_active, n_cre, n_con)


def moving_average(series, w):
    """Centred moving average over the non-missing values in each window.

    Odd ``w`` averages ``w`` equally weighted days; even ``w`` spans ``w + 1``
    days with half weight on the two end days, so the window stays centred.
    Points whose window holds no observed value stay NaN.

    Raises
    ------
    AllMissing
        If every value is missing.
    """
    w = check_positive_int(w, "w")
    v = check_series(series, allow_nan=True)
    ok = ~np.isnan(v)
    if not ok.any():
        raise AllMissing("every value is missing")
    if w % 2:
        kernel = np.ones(w)
    else:
        kernel = np.ones(w + 1)
        kernel[0] = kernel[-1] = 0.5
    # full convolution then a centred slice; mode="same" breaks when the kernel is longer
    h = (kernel.size - 1) // 2
    n = v.shape[0]
    num = np.convolve(np.where(ok, v, 0.0), kernel)[h:h + n]
    den = np.convolve(ok.astype(float), kernel)[h:h + n]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / den, np.nan)
    if w == 1:
        out = np.where(ok, v, np.nan)
    return out


def cross_correlation(a, b):
    """Lag-0 Pearson correlation over days where both series are observed.

    Raises
    ------
    DegenerateSeries
        Fewer than three paired days, or a constant series.
    """
    a = check_series(a, "a", allow_nan=True)
    b = check_series(b, "b", allow_nan=True)
    if a.shape != b.shape:
        raise ValueError("series must be aligned")
    ok = ~np.isnan(a) & ~np.isnan(b)
    if ok.sum() < 3:
        raise DegenerateSeries(f"only {int(ok.sum())} paired observation(s)")
    x, y = a[ok], b[ok]
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateSeries("constant series")
    r = np.corrcoef(x, y)[0, 1]
    return float(np.clip(r, -1.0, 1.0))


def _state_matrix(assign):
    """Dense (user x window) matrix of states 0=Creator, 1=Consumer, 2=Inactive."""
    users, row = np.unique(assign.user, return_inverse=True)
    S = np.full((users.size, assign.n_windows), 2, dtype=np.int8)
    spreader = assign.role != Role.NonSpreader
    S[row[spreader], assign.window[spreader]] = assign.role[spreader]
    return users, S


@dataclass
class TransitionMatrix:
    """Counts of consecutive-window state pairs, rows = from-state."""

    states: tuple
    counts: np.ndarray

    def to_dict(self):
        return {"states": list(self.states),
                "counts": {a: {b: int(self.counts[i, j]) for j, b in enumerate(self.states)}
                           for i, a in enumerate(self.states)}}


def transition_counts(assign):
    """Consecutive-day transitions between Creator, Consumer and Inactive.

    Every user in the assignment contributes one transition per pair of
    consecutive windows; non-spreading and absent days are both Inactive.
    """
    if assign.window_days != 1:
        raise ValueError("transition_counts needs 1-day windows")
    _, S = _state_matrix(assign)
    if S.shape[1] < 2 or S.shape[0] == 0:
        return TransitionMatrix(STATES, np.zeros((3, 3), dtype=np.int64))
    pair = S[:, :-1].astype(np.int64) * 3 + S[:, 1:]
    counts = np.bincount(pair.ravel(), minlength=9).reshape(3, 3)
    return TransitionMatrix(STATES, counts.astype(np.int64))


@dataclass(frozen=True)
class ReturnRecord:
    user: str
    from_role: Role
    to_role: Role
    gap: int


@dataclass
class ReturnRecords:
    """Column-wise first-return records (one per consecutive pair of spreader days)."""

    user: np.ndarray
    from_role: np.ndarray
    to_role: np.ndarray
    gap: np.ndarray
    users: np.ndarray

    def __len__(self):
        return self.gap.shape[0]

    def __iter__(self):
        for u, a, b, g in zip(self.user, self.from_role, self.to_role, self.gap):
            yield ReturnRecord(self.users[u], Role(a), Role(b), int(g))


def first_return_times(assign):
    """Silent-day gaps between each user's consecutive fake-spreader days.

    Users with a single spreader day contribute nothing.
    """
    spreader = assign.role != Role.NonSpreader
    u = assign.user[spreader]
    w = assign.window[spreader]
    r = assign.role[spreader]
    # rows are sorted by (user, window), so consecutive rows are chronological
    same = u[1:] == u[:-1]
    idx = np.flatnonzero(same)
    return ReturnRecords(u[idx], r[idx], r[idx + 1], (w[idx + 1] - w[idx] - 1).astype(np.int64),
                         assign.users)


def parse_bins(text):
    """Parse ``"0-2,3-8,9-17,18-45"`` into ``((0, 2), (3, 8), ...)``."""
    bins = []
    for part in str(text).split(","):
        lo, sep, hi = part.strip().partition("-")
        if not sep:
            raise ValueError(f"bad bin {part!r}; expected lo-hi")
        bins.append((int(lo), int(hi)))
    return check_bins(bins)


def check_bins(bins):
    bins = tuple((int(a), int(b)) for a, b in bins)
    if not bins:
        raise ValueError("at least one bin is required")
    for lo, hi in bins:
        if lo < 0 or hi < lo:
            raise ValueError(f"invalid bin ({lo}, {hi})")
    for (a0, a1), (b0, b1) in zip(bins, bins[1:]):
        if b0 <= a1:
            raise ValueError("bins must be sorted and disjoint")
    return bins


@dataclass
class ReturnProfile:
    """Return-role probabilities per from-role and gap bin.

    ``counts[f, b]`` holds ``(to Creator, to Consumer)`` for from-role ``f``
    (0 = Creator, 1 = Consumer) and bin ``b``; probabilities are NaN for
    empty bins.  Records whose gap falls outside every bin are counted in
    ``unbinned``.
    """

    bins: tuple
    counts: np.ndarray
    unbinned: int

    @property
    def probabilities(self):
        tot = self.counts.sum(axis=2, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(tot > 0, self.counts / np.maximum(tot, 1), np.nan)

    @property
    def empty_bins(self):
        return self.counts.sum(axis=2) == 0

    def to_dict(self):
        p = self.probabilities
        out = {"bins": [list(b) for b in self.bins], "unbinned": self.unbinned,
               "profiles": {}}
        for f, role in enumerate(("Creator", "Consumer")):
            rows = []
            for b, (lo, hi) in enumerate(self.bins):
                empty = bool(self.empty_bins[f, b])
                rows.append({
                    "bin": f"{lo}-{hi}",
                    "n_to_creator": int(self.counts[f, b, 0]),
                    "n_to_consumer": int(self.counts[f, b, 1]),
                    "p_creator": None if empty else float(p[f, b, 0]),
                    "p_consumer": None if empty else float(p[f, b, 1]),
                    "empty": empty,
                })
            out["profiles"][role] = rows
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def return_probability(records, bins=DEFAULT_BINS):
    """Conditional probability of returning as Creator or Consumer, per gap bin."""
    bins = check_bins(bins)
    if not isinstance(records, ReturnRecords):
        recs = list(records)
        records = ReturnRecords(np.zeros(len(recs), dtype=np.int64),
                                np.array([int(r.from_role) for r in recs], dtype=np.int8),
                                np.array([int(r.to_role) for r in recs], dtype=np.int8),
                                np.array([r.gap for r in recs], dtype=np.int64),
                                np.array([], dtype=object))
    counts = np.zeros((2, len(bins), 2), dtype=np.int64)
    gap = np.asarray(records.gap)
    binned = np.zeros(gap.shape, dtype=bool)
    for b, (lo, hi) in enumerate(bins):
        inb = (gap >= lo) & (gap <= hi)
        binned |= inb
        idx = np.asarray(records.from_role)[inb].astype(np.int64) * 2 + \
            np.asarray(records.to_role)[inb]
        counts[:, b, :] = np.bincount(idx, minlength=4).reshape(2, 2)
    return ReturnProfile(bins, counts, int((~binned).sum()))
