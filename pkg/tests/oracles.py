"""Slow, loop-based reference implementations used to check the vectorised code."""

import math
from collections import Counter, defaultdict

import numpy as np

from infodemic.ingestion import FAKE_CATEGORIES, ContentCategory

FAKE = {c.value for c in FAKE_CATEGORIES}
ROLE_NAMES = ("Creator", "Consumer", "NonSpreader")


def random_records(rng, n_events, n_users, n_days=10, start=1_600_000_000, p_none=0.1):
    """Random share tuples ``(timestamp, actor, source, None, category)``."""
    cats = list(ContentCategory)
    recs = []
    for _ in range(n_events):
        a, s = rng.choice(n_users, 2, replace=False)
        ts = start + int(rng.integers(0, n_days * 86400))
        c = None if rng.random() < p_none else cats[int(rng.integers(len(cats)))]
        recs.append((ts, f"u{a:03d}", f"u{s:03d}", None, c))
    return recs


def concentration(log, category="all"):
    """Concentration curve by counting and sorting in pure Python."""
    counts = Counter()
    for ev in log.records():
        c = ev.category
        if category == "all":
            hit = True
        elif category == "fake":
            hit = c is not None and c.value in FAKE
        elif category is ContentCategory.Unlabeled:
            hit = c is None or c is ContentCategory.Unlabeled
        else:
            hit = c is category
        if hit:
            counts[ev.actor] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    total = sum(counts.values())
    xs, ys, cum = [], [], 0
    for i, (_, c) in enumerate(ranked, 1):
        cum += c
        xs.append(i / len(ranked))
        ys.append(cum / total)
    if xs:
        xs[-1] = ys[-1] = 1.0
    return xs, ys, [c for _, c in ranked]


def roles(log, threshold, window_days=1):
    """``{(user, window): (role, total, fake)}`` by direct counting."""
    origin = log.window[0] // 86400
    tot, fk = Counter(), Counter()
    for ev in log.records():
        w = 0 if window_days is None else (ev.timestamp // 86400 - origin) // window_days
        tot[ev.actor, w] += 1
        if ev.category is not None and ev.category.value in FAKE:
            fk[ev.actor, w] += 1
    out = {}
    for key, t in tot.items():
        f = fk[key] / t
        role = "Creator" if f >= threshold else ("Consumer" if f > 0 else "NonSpreader")
        out[key] = (role, t, fk[key])
    return out


def daily(log, cells):
    """Per-day (fake fraction, creator fraction, consumer fraction) with None for empty days."""
    origin = log.window[0] // 86400
    n_days = log.window[1] // 86400 - origin + 1
    ev_n = [0] * n_days
    ev_f = [0] * n_days
    for ev in log.records():
        d = ev.timestamp // 86400 - origin
        ev_n[d] += 1
        ev_f[d] += ev.category is not None and ev.category.value in FAKE
    act = defaultdict(list)
    for (u, w), (role, _, _) in cells.items():
        act[w].append(role)
    out = []
    for d in range(n_days):
        fake = ev_f[d] / ev_n[d] if ev_n[d] else None
        a = act[d]
        cre = a.count("Creator") / len(a) if a else None
        con = a.count("Consumer") / len(a) if a else None
        out.append((fake, cre, con))
    return out


def return_records(cells):
    """``(user, from_role, to_role, gap)`` by scanning each user's spreader days."""
    per_user = defaultdict(list)
    for (u, w), role in cells.items():
        if role in ("Creator", "Consumer"):
            per_user[u].append((w, role))
    out = []
    for u in sorted(per_user):
        days = sorted(per_user[u])
        for (w1, r1), (w2, r2) in zip(days, days[1:]):
            out.append((u, r1, r2, w2 - w1 - 1))
    return out


def return_table(records, bins):
    """``{(from_role, bin): [n_to_creator, n_to_consumer]}`` and the unbinned count."""
    table = {(f, b): [0, 0] for f in ("Creator", "Consumer") for b in range(len(bins))}
    unbinned = 0
    for _, fr, to, gap in records:
        for b, (lo, hi) in enumerate(bins):
            if lo <= gap <= hi:
                table[fr, b][0 if to == "Creator" else 1] += 1
                break
        else:
            unbinned += 1
    return table, unbinned


def transitions(cells, n_windows):
    """3x3 counts of consecutive-day states over users present in ``cells``."""
    idx = {"Creator": 0, "Consumer": 1}
    users = sorted({u for u, _ in cells})
    m = [[0] * 3 for _ in range(3)]
    for u in users:
        states = [idx.get(cells.get((u, w)), 2) for w in range(n_windows)]
        for a, b in zip(states, states[1:]):
            m[a][b] += 1
    return m


def group_links(edges, groups):
    """Observed link counts between groups from an explicit edge list."""
    obs = Counter()
    for s, d in edges:
        obs[groups[s], groups[d]] += 1
    return obs


def simplex_cross_map(source, target, E, tau, L, td):
    """Cross-map skill with the first-L library, written as plain loops.

    Neighbour search sorts by (distance, time index) so ties go to the earlier
    point; weights use the smallest positive distance as scale.
    """
    n = len(source)
    off = (E - 1) * tau
    pts = [[source[t - c * tau] for c in range(E)] for t in range(off, n)]
    valid = [j for j in range(len(pts)) if 0 <= j + off + td < n]
    lib = valid[:L]
    k = E + 1
    obs, est = [], []
    for q in valid:
        cand = []
        for j in lib:
            if j == q:
                continue
            d = math.sqrt(sum((pts[q][c] - pts[j][c]) ** 2 for c in range(E)))
            cand.append((d, j))
        cand.sort()
        nb = cand[:k]
        pos = [d for d, _ in nb if d > 0]
        eps = min(pos) if pos else 1.0
        w = [1.0 if d == 0 else math.exp(-d / eps) for d, _ in nb]
        tot = sum(w)
        est.append(sum(wi * target[j + off + td] for wi, (_, j) in zip(w, nb)) / tot)
        obs.append(target[q + off + td])
    r = np.corrcoef(obs, est)[0, 1]
    return 0.0 if np.isnan(r) else float(r)


def random_cells(rng, n_users, n_windows, p_active=0.4):
    """Random ``{(user, window): role_name}`` covering about ``p_active`` of the grid."""
    cells = {}
    for u in range(n_users):
        for w in range(n_windows):
            if rng.random() < p_active:
                cells[f"u{u:03d}", w] = ROLE_NAMES[int(rng.integers(3))]
    return cells


def cells_to_rows(cells):
    return [(u, w, r, 1, 0) for (u, w), r in cells.items()]
