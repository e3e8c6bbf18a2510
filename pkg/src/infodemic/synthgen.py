"""Seeded generators for validating the pipeline against known ground truth.

``gen_population`` plants creator/consumer/non-spreader roles per user-day in
an event log; ``gen_coupled_logistic`` and ``gen_lag_coupled`` produce
coupled logistic-map pairs with known causal direction and delay.
"""

from dataclasses import dataclass, fields, replace
import math

import numpy as np

from .classification import Role, RoleAssignment
from .errors import Diverged, InvalidParams
from .ingestion import SECONDS_PER_DAY, ContentCategory, EventLog

STUDY_START = 1579651200  # 2020-01-22T00:00:00Z

# Table 1 proportions among fake-spreaders: only creators, only consumers, mixed
TABLE1_PROPORTIONS = (0.1291, 0.8242, 0.0467)

FAKE_POOL = (ContentCategory.Clickbait, ContentCategory.FakeHoax,
             ContentCategory.ConspiracyJunkScience)
RELIABLE_POOL = (ContentCategory.Science, ContentCategory.MainstreamMedia,
                 ContentCategory.Satire, ContentCategory.Political)
DOMAINS_PER_CATEGORY = 3

# planted behaviour types
_CREATOR, _CONSUMER, _MIXED, _NONSPREADER = range(4)


@dataclass(frozen=True)
class PopulationParams:
    """Parameters of the planted-role population generator.

    Activity is heavy-tailed twice over: the number of active days per user
    and the number of shares per active day both follow discrete power laws
    (exponents ``activity_exponent`` and ``daily_exponent``).  Per-day fake
    counts are clipped so every creator day sits at least ``margin`` above
    ``threshold`` and every consumer day at least ``margin`` below it.

    ``driver_amplitude > 0`` modulates how likely each group is to be active
    on a given day by a shared slow driver; ``*_coupling`` in [0, 1] sets how
    closely each group follows it (the rest is group-specific noise).
    """

    n_creators: int = 10
    n_consumers: int = 90
    n_mixed: int = 0
    n_nonspreaders: int = 100
    n_days: int = 30
    start: int = STUDY_START
    activity_exponent: float = 2.1
    daily_exponent: float = 2.1
    min_daily_events: int = 8
    max_daily_events: int = 200
    max_active_days: int = None
    p_fake_creator: float = 0.5
    p_fake_consumer: float = 0.08
    threshold: float = 0.2
    margin: float = 0.05
    creator_preference: float = 4.0
    consumer_preference: float = 10.0
    p_unlabeled: float = 0.5
    driver_amplitude: float = 0.0
    driver_timescale: float = 8.0
    creator_coupling: float = 1.0
    consumer_coupling: float = 1.0
    seed: int = 0

    def validate(self):
        for name in ("n_creators", "n_consumers", "n_mixed", "n_nonspreaders"):
            if getattr(self, name) < 0:
                raise InvalidParams(f"{name} must be >= 0")
        if self.n_days < 1:
            raise InvalidParams("n_days must be >= 1")
        if self.n_mixed and self.n_days < 2:
            raise InvalidParams("mixed users need at least two days")
        for name in ("p_fake_creator", "p_fake_consumer", "p_unlabeled",
                     "creator_coupling", "consumer_coupling"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParams(f"{name} must lie in [0, 1], got {v}")
        if not 0.0 < self.threshold <= 1.0:
            raise InvalidParams("threshold must lie in (0, 1]")
        if self.margin < 0 or self.threshold + self.margin > 1.0:
            raise InvalidParams("threshold + margin must not exceed 1")
        if self.p_fake_creator < self.threshold + self.margin:
            raise InvalidParams("p_fake_creator must clear threshold + margin")
        if not 0.0 < self.p_fake_consumer < self.threshold:
            raise InvalidParams("p_fake_consumer must lie strictly inside (0, threshold)")
        if self.min_daily_events < 1 or self.max_daily_events < self.min_daily_events:
            raise InvalidParams("need 1 <= min_daily_events <= max_daily_events")
        if (self.n_consumers or self.n_mixed) and \
                (1.0 / self.min_daily_events > self.threshold - self.margin
                 or 1.0 / self.min_daily_events >= self.threshold):
            raise InvalidParams(
                "min_daily_events too small: one fake share already breaches the "
                "consumer margin")
        if self.activity_exponent <= 1 or self.daily_exponent <= 1:
            raise InvalidParams("power-law exponents must exceed 1")
        if self.creator_preference <= 0 or self.consumer_preference <= 0:
            raise InvalidParams("preferences must be positive")
        if self.driver_amplitude < 0 or self.driver_timescale <= 0:
            raise InvalidParams("driver_amplitude >= 0 and driver_timescale > 0 required")
        return self

    @classmethod
    def from_mapping(cls, mapping):
        """Build from a flat key/value mapping of strings (config-file values)."""
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for k, v in mapping.items():
            k = k.replace("-", "_")
            if k not in types:
                raise InvalidParams(f"unknown population parameter {k!r}")
            if v is None or v == "None":
                kwargs[k] = None
            elif types[k] in (int, "int"):
                kwargs[k] = int(v)
            else:
                kwargs[k] = float(v)
        return cls(**kwargs)


def table1_params(n_spreaders=20000, n_nonspreaders=0, n_days=120, seed=0, **kw):
    """Population whose behaviour types are drawn with the Table 1 proportions."""
    rng = np.random.default_rng([seed, 1])
    n_cre, n_con, n_mix = rng.multinomial(n_spreaders, TABLE1_PROPORTIONS)
    return PopulationParams(n_creators=int(n_cre), n_consumers=int(n_con),
                            n_mixed=int(n_mix), n_nonspreaders=n_nonspreaders,
                            n_days=n_days, seed=seed, **kw)


def pipeline_params(seed=0, **kw):
    """Population with group activity driven by a shared daily signal.

    Consumers follow the driver tightly and creators loosely, so the consumer
    and fake-volume series co-move while creators only partly do.
    """
    base = dict(n_creators=2000, n_consumers=30000, n_mixed=0, n_nonspreaders=40000,
                n_days=120, driver_amplitude=1.0, consumer_coupling=1.0,
                creator_coupling=0.8, activity_exponent=2.1, daily_exponent=3.5,
                p_fake_creator=0.25, p_fake_consumer=0.14, seed=seed)
    base.update(kw)
    return PopulationParams(**base)


def category_table():
    """Domain table matching the domains emitted by :func:`gen_population`."""
    table = {}
    for cat in FAKE_POOL + RELIABLE_POOL:
        for j in range(DOMAINS_PER_CATEGORY):
            table[_domain_name(cat, j)] = cat
    return table


def _domain_name(cat, j):
    return f"{cat.name.lower()}-{j}.example"


def _power_law_int(rng, size, minimum, exponent, maximum):
    """Discrete heavy tail: floor of a Pareto draw with tail exponent ``exponent``."""
    u = rng.random(size)
    v = np.floor(minimum * (1.0 - u) ** (-1.0 / (exponent - 1.0)))
    return np.clip(v, minimum, maximum).astype(np.int64)


def _driver(rng, n_days, timescale):
    phi = math.exp(-1.0 / timescale)
    e = rng.standard_normal(n_days)
    s = np.empty(n_days)
    s[0] = e[0]
    for t in range(1, n_days):
        s[t] = phi * s[t - 1] + math.sqrt(1 - phi * phi) * e[t]
    sd = s.std()
    return (s - s.mean()) / sd if sd > 0 else s * 0.0


def _kmin_at_least(frac, n):
    """Smallest k with k / n >= frac, using the same float test as the classifier."""
    k = np.ceil(frac * n).astype(np.int64)
    k = np.where((k > 0) & ((k - 1) / n >= frac), k - 1, k)
    k = np.where(k / n < frac, k + 1, k)
    return k


def _kmax_at_most(frac, n):
    """Largest k with k / n <= frac."""
    k = np.floor(frac * n).astype(np.int64)
    k = np.where(k / n > frac, k - 1, k)
    k = np.where((k + 1) / n <= frac, k + 1, k)
    return k


def gen_population(params=None, chunk=20000):
    """Event log with planted roles.

    Returns
    -------
    log : EventLog
        Share events with explicit categories and synthetic domains.
    planted : RoleAssignment
        Planted role and counts for every active (user, day) cell, 1-day windows.
    """
    p = (params or PopulationParams()).validate()
    rng = np.random.default_rng(p.seed)
    n_users = p.n_creators + p.n_consumers + p.n_mixed + p.n_nonspreaders
    if n_users < 2:
        raise InvalidParams("need at least two users")
    width = max(6, len(str(n_users - 1)))
    users = np.array([f"u{i:0{width}d}" for i in range(n_users)], dtype=object)
    utype = np.repeat(np.array([_CREATOR, _CONSUMER, _MIXED, _NONSPREADER], dtype=np.int8),
                      [p.n_creators, p.n_consumers, p.n_mixed, p.n_nonspreaders])
    rng.shuffle(utype)

    D = p.n_days
    max_days = min(D, p.max_active_days or D)
    k_days = _power_law_int(rng, n_users, 1, p.activity_exponent, max_days)
    k_days[utype == _MIXED] = np.maximum(k_days[utype == _MIXED], 2)

    # log-activity of each group per day
    drive = _driver(rng, D, p.driver_timescale)
    log_w = np.zeros((4, D))
    for g, c in ((_CREATOR, p.creator_coupling), (_CONSUMER, p.consumer_coupling),
                 (_MIXED, p.consumer_coupling)):
        noise = rng.standard_normal(D)
        log_w[g] = p.driver_amplitude * (c * drive + math.sqrt(1 - c * c) * noise)

    cell_user, cell_day = [], []
    for lo in range(0, n_users, chunk):
        hi = min(n_users, lo + chunk)
        gumbel = -np.log(-np.log(rng.random((hi - lo, D))))
        keys = log_w[utype[lo:hi]] + gumbel
        order = np.argsort(-keys, axis=1, kind="stable")
        take = np.arange(D)[None, :] < k_days[lo:hi, None]
        rows = np.broadcast_to(np.arange(lo, hi)[:, None], order.shape)
        cell_user.append(rows[take])
        cell_day.append(order[take])
    cell_user = np.concatenate(cell_user).astype(np.int64)
    cell_day = np.concatenate(cell_day).astype(np.int64)
    srt = np.lexsort((cell_day, cell_user))
    cell_user, cell_day = cell_user[srt], cell_day[srt]
    n_cells = cell_user.size

    ctype = utype[cell_user]
    role = np.full(n_cells, Role.NonSpreader, dtype=np.int8)
    role[ctype == _CREATOR] = Role.Creator
    role[ctype == _CONSUMER] = Role.Consumer
    mixed_cells = np.flatnonzero(ctype == _MIXED)
    if mixed_cells.size:
        role[mixed_cells] = np.where(rng.random(mixed_cells.size) < 0.5,
                                     Role.Creator, Role.Consumer)
        # force both roles: the first two cells of every mixed user differ
        first = mixed_cells[np.r_[True, cell_user[mixed_cells][1:] != cell_user[mixed_cells][:-1]]]
        flip = rng.random(first.size) < 0.5
        role[first] = np.where(flip, Role.Creator, Role.Consumer)
        role[first + 1] = np.where(flip, Role.Consumer, Role.Creator)

    n_ev = _power_law_int(rng, n_cells, p.min_daily_events, p.daily_exponent,
                          p.max_daily_events)
    n_fake = np.zeros(n_cells, dtype=np.int64)
    cre = role == Role.Creator
    con = role == Role.Consumer
    n_fake[cre] = np.clip(rng.binomial(n_ev[cre], p.p_fake_creator),
                          _kmin_at_least(p.threshold + p.margin, n_ev[cre]), n_ev[cre])
    kmax = _kmax_at_most(p.threshold - p.margin, n_ev[con])
    kmax = np.where(kmax / n_ev[con] >= p.threshold, kmax - 1, kmax)
    n_fake[con] = np.clip(rng.binomial(n_ev[con], p.p_fake_consumer), 1, kmax)

    # expand cells into events; the first n_fake events of each cell are fake
    ev_cell = np.repeat(np.arange(n_cells), n_ev)
    n_events = ev_cell.size
    start_of_cell = np.cumsum(n_ev) - n_ev
    rank = np.arange(n_events) - start_of_cell[ev_cell]
    is_fake = rank < n_fake[ev_cell]
    actor = cell_user[ev_cell]
    day_start = (p.start // SECONDS_PER_DAY) * SECONDS_PER_DAY
    ts = day_start + cell_day[ev_cell] * SECONDS_PER_DAY + rng.integers(0, SECONDS_PER_DAY, n_events)

    category = np.full(n_events, -1, dtype=np.int8)
    domain = np.full(n_events, -1, dtype=np.int32)
    pools = FAKE_POOL + RELIABLE_POOL
    dom_names = sorted(_domain_name(c, j) for c in pools for j in range(DOMAINS_PER_CATEGORY))
    dom_code = {name: i for i, name in enumerate(dom_names)}
    pool_dom = np.array([[dom_code[_domain_name(c, j)] for j in range(DOMAINS_PER_CATEGORY)]
                         for c in pools], dtype=np.int32)
    pool_cat = np.array([c.value for c in pools], dtype=np.int8)
    fi = np.flatnonzero(is_fake)
    which = rng.integers(0, len(FAKE_POOL), fi.size)
    category[fi] = pool_cat[which]
    domain[fi] = pool_dom[which, rng.integers(0, DOMAINS_PER_CATEGORY, fi.size)]
    ri = np.flatnonzero(~is_fake & (rng.random(n_events) >= p.p_unlabeled))
    which = len(FAKE_POOL) + rng.integers(0, len(RELIABLE_POOL), ri.size)
    category[ri] = pool_cat[which]
    domain[ri] = pool_dom[which, rng.integers(0, DOMAINS_PER_CATEGORY, ri.size)]

    source = _draw_sources(rng, actor, utype, p)
    log = EventLog(ts, actor, source, users, category, domain, np.array(dom_names, dtype=object),
                   window=(day_start, day_start + D * SECONDS_PER_DAY - 1))
    planted = RoleAssignment(cell_user, cell_day, n_ev, n_fake, role, users, D, 1,
                             day_start // SECONDS_PER_DAY, p.threshold)
    return log, planted


def _draw_sources(rng, actor, utype, p):
    """Retweet targets: creators are over-weighted by the actor type's preference."""
    creators = np.flatnonzero(utype == _CREATOR)
    others = np.flatnonzero(utype != _CREATOR)
    pref = np.ones(4)
    pref[_CREATOR] = p.creator_preference
    pref[_CONSUMER] = p.consumer_preference
    pref[_MIXED] = p.consumer_preference
    n_c, n_o = creators.size, others.size
    w = pref[utype[actor]] * n_c
    p_creator = w / (w + n_o) if n_c else np.zeros(actor.size)
    to_creator = rng.random(actor.size) < p_creator
    if n_o == 0:
        to_creator[:] = True
    src = np.empty(actor.size, dtype=np.int64)
    for mask, pool in ((to_creator, creators), (~to_creator, others)):
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            continue
        pick = rng.integers(0, pool.size, idx.size)
        s = pool[pick]
        clash = s == actor[idx]
        if pool.size > 1:
            s[clash] = pool[(pick[clash] + 1) % pool.size]
        else:
            alt = others if pool is creators else creators
            s[clash] = alt[rng.integers(0, alt.size, int(clash.sum()))]
        src[idx] = s
    return src


# -- coupled maps --------------------------------------------------------------

@dataclass(frozen=True)
class CoupledMapParams:
    """Two-species logistic map.

    ``x' = x (r_x - r_x x - beta_xy y)`` and ``y' = y (r_y - r_y y - beta_yx x)``:
    ``beta_xy`` is the effect of Y on X.  ``noise`` is the standard deviation
    of additive observation noise.
    """

    r_x: float = 3.8
    r_y: float = 3.7
    beta_xy: float = 0.32
    beta_yx: float = 0.0
    n: int = 1000
    burn_in: int = 300
    noise: float = 0.0
    lag: int = 0
    seed: int = 0

    def validate(self):
        if self.n < 1:
            raise InvalidParams("n must be >= 1")
        if self.burn_in < 100:
            raise InvalidParams("burn_in must be >= 100")
        if self.noise < 0:
            raise InvalidParams("noise must be >= 0")
        if self.lag < 0:
            raise InvalidParams("lag must be >= 0")
        return self

    @classmethod
    def from_mapping(cls, mapping):
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for k, v in mapping.items():
            k = k.replace("-", "_")
            if k not in types:
                raise InvalidParams(f"unknown coupled-map parameter {k!r}")
            kwargs[k] = int(v) if types[k] in (int, "int") else float(v)
        return cls(**kwargs)


def _check_state(v, t):
    if not 0.0 < v < 1.0:
        raise Diverged(f"state left (0, 1) at step {t}: {v}")


def gen_coupled_logistic(params=None):
    """Simulate the coupled logistic pair after burn-in; returns ``(x, y)``.

    Raises
    ------
    Diverged
        If either state leaves the open unit interval.
    """
    p = (params or CoupledMapParams()).validate()
    rng = np.random.default_rng(p.seed)
    x, y = rng.uniform(0.2, 0.8, 2)
    xs = np.empty(p.n)
    ys = np.empty(p.n)
    for t in range(p.burn_in + p.n):
        x, y = x * (p.r_x - p.r_x * x - p.beta_xy * y), y * (p.r_y - p.r_y * y - p.beta_yx * x)
        _check_state(x, t)
        _check_state(y, t)
        if t >= p.burn_in:
            xs[t - p.burn_in] = x
            ys[t - p.burn_in] = y
    if p.noise:
        xs = xs + rng.normal(0, p.noise, p.n)
        ys = ys + rng.normal(0, p.noise, p.n)
    return xs, ys


def gen_lag_coupled(params=None, lag=None):
    """X drives Y through its value ``lag`` steps earlier.

    ``y[t] = y[t-1] (r_y - r_y y[t-1] - beta_yx x[t-lag])`` with X an
    autonomous logistic map; ``beta_xy`` is ignored.  With the default
    parameters the coupling strength is 0.32.
    """
    if params is None:
        params = CoupledMapParams(beta_xy=0.0, beta_yx=0.32)
    if lag is not None:
        params = replace(params, lag=lag)
    p = params.validate()
    m = p.lag
    if m >= p.n:
        raise InvalidParams(f"lag {m} exceeds series length {p.n}")
    rng = np.random.default_rng(p.seed)
    total = p.burn_in + p.n + m
    X = np.empty(total)
    Y = np.empty(total)
    X[0], Y[0] = rng.uniform(0.2, 0.8, 2)
    for t in range(1, total):
        X[t] = X[t - 1] * (p.r_x - p.r_x * X[t - 1])
        _check_state(X[t], t)
    for t in range(1, total):
        drive = X[t - m] if t >= m else X[0]
        Y[t] = Y[t - 1] * (p.r_y - p.r_y * Y[t - 1] - p.beta_yx * drive)
        _check_state(Y[t], t)
    xs, ys = X[-p.n:].copy(), Y[-p.n:].copy()
    if p.noise:
        xs += rng.normal(0, p.noise, p.n)
        ys += rng.normal(0, p.noise, p.n)
    return xs, ys
