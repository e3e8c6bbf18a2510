"""Retweet network, concentration curves and inter-group link densities."""

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .classification import Role, RoleAssignment
from .errors import DegenerateNetwork, EmptyResult
from .ingestion import ContentCategory

GROUPS = (Role.Creator, Role.Consumer, Role.NonSpreader)


@dataclass(frozen=True)
class RetweetNetwork:
    """Directed multigraph, edges from the retweeting to the retweeted user.

    ``src``/``dst`` index into ``nodes`` and are unique as pairs, sorted;
    ``weight`` is the number of share events behind each pair.
    """

    nodes: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_links(self):
        return int(self.weight.sum())

    def edges(self):
        return {(self.nodes[s], self.nodes[d]): int(w)
                for s, d, w in zip(self.src, self.dst, self.weight)}

    def out_strength(self):
        return np.bincount(self.src, weights=self.weight, minlength=self.n_nodes)

    def in_strength(self):
        return np.bincount(self.dst, weights=self.weight, minlength=self.n_nodes)


def build_network(log, simple=False, universe=None):
    """Fold a log into a :class:`RetweetNetwork`.

    Parameters
    ----------
    simple : bool
        Collapse parallel share events into single links.
    universe : iterable of str, optional
        Extra user ids to include as (possibly isolated) nodes.
    """
    used = np.unique(np.concatenate([log.actor, log.source]))
    names = log.users[used]
    if universe is not None:
        names = np.array(sorted(set(names.tolist()) | set(universe)), dtype=object)
    names = np.asarray(names, dtype=object)
    # map log codes to node indices; names are sorted like log.users
    remap = np.full(len(log.users), -1, dtype=np.int64)
    remap[used] = np.searchsorted(names.astype(str), log.users[used].astype(str))
    s = remap[log.actor]
    d = remap[log.source]
    n = names.shape[0]
    key = s * n + d
    pairs, counts = np.unique(key, return_counts=True)
    if simple:
        counts = np.ones_like(counts)
    return RetweetNetwork(names, pairs // n, pairs % n, counts.astype(np.int64))


# -- concentration curves ----------------------------------------------------

@dataclass(frozen=True)
class ConcentrationCurve:
    """Cumulative share of content against cumulative share of users.

    Users are ranked by descending activity; point ``i`` covers the top
    ``i + 1`` users.  The implicit origin (0, 0) is not stored.
    """

    label: str
    user_share: np.ndarray
    content_share: np.ndarray
    counts: np.ndarray

    def __len__(self):
        return self.user_share.shape[0]

    def downsample(self, max_points=1000):
        n = len(self)
        if n <= max_points:
            return self
        idx = np.unique(np.round(np.linspace(0, n - 1, max_points)).astype(int))
        return ConcentrationCurve(self.label, self.user_share[idx],
                                  self.content_share[idx], self.counts[idx])


def _category_mask(log, category):
    if category in (None, "all"):
        return np.ones(len(log), dtype=bool), "all"
    if category == "fake":
        return log.fake, "fake"
    cat = category if isinstance(category, ContentCategory) else ContentCategory.parse(category)
    if cat is ContentCategory.Unlabeled:
        mask = (log.category < 0) | (log.category == cat.value)
    else:
        mask = log.category == cat.value
    return mask, cat.name


def concentration_curve(log, category="all"):
    """Concentration curve of share events over the acting users.

    Parameters
    ----------
    category : "all", "fake", or a ContentCategory (or its name)

    Raises
    ------
    EmptyResult
        If no event matches the category filter.
    """
    mask, label = _category_mask(log, category)
    counts = np.bincount(log.actor[mask], minlength=len(log.users))
    users = np.flatnonzero(counts)
    if users.size == 0:
        raise EmptyResult(f"no events for category {label}")
    c = counts[users]
    # descending count, ties by user id (codes follow sorted id order)
    order = np.lexsort((users, -c))
    c = c[order]
    total = c.sum()
    x = np.arange(1, c.size + 1) / c.size
    y = np.cumsum(c) / total
    x[-1] = 1.0
    y[-1] = 1.0
    return ConcentrationCurve(label, x, y, c)


def concentration_curves(log, categories=None):
    """Curves for ``all``, ``fake`` and each category present in the log."""
    if categories is None:
        categories = ["all", "fake"] + [c for c in ContentCategory
                                        if np.any(_category_mask(log, c)[0])]
    out = []
    for cat in categories:
        try:
            out.append(concentration_curve(log, cat))
        except EmptyResult:
            continue
    return out


def write_curves_csv(curves, stream, max_points=None):
    if isinstance(stream, (str, os.PathLike)):
        with open(stream, "w", newline="", encoding="utf-8") as fh:
            return write_curves_csv(curves, fh, max_points)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(("user_share", "content_share", "category"))
    for curve in curves:
        if max_points:
            curve = curve.downsample(max_points)
        for x, y in zip(curve.user_share, curve.content_share):
            w.writerow((repr(float(x)), repr(float(y)), curve.label))


def read_curves_csv(path):
    data = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            xs, ys = data.setdefault(row["category"], ([], []))
            xs.append(float(row["user_share"]))
            ys.append(float(row["content_share"]))
    return {k: (np.array(v[0]), np.array(v[1])) for k, v in data.items()}


# -- link densities ----------------------------------------------------------

def expected_links_random(n_links, n_nodes, n_a, n_b, same_group=False):
    """Expected links from group A to group B under uniform random placement.

    ``n_links`` link units are spread uniformly over the ``N(N-1)`` ordered
    node pairs.

    Raises
    ------
    DegenerateNetwork
        If ``n_nodes < 2`` or ``n_links == 0``.
    """
    if n_nodes < 2 or n_links <= 0:
        raise DegenerateNetwork(f"need >= 2 nodes and >= 1 link (N={n_nodes}, L={n_links})")
    pairs = n_a * (n_a - 1) if same_group else n_a * n_b
    return n_links * pairs / (n_nodes * (n_nodes - 1))


@dataclass
class DensityMatrix:
    """Observed vs expected links for each ordered group pair (row = retweeter).

    ``stderr`` is the null-model standard error of the ratio, available for
    the uniform null only.
    """

    groups: tuple
    sizes: dict
    observed: np.ndarray
    expected: np.ndarray
    ratio: np.ndarray
    stderr: np.ndarray
    n_links: int
    n_nodes: int
    null: str = "uniform"

    def cell(self, a, b):
        i, j = self.groups.index(Role(a)), self.groups.index(Role(b))
        return self.observed[i, j], self.expected[i, j], self.ratio[i, j]

    def to_dict(self):
        def clean(v):
            v = float(v)
            return None if not np.isfinite(v) else v

        cells = []
        for i, a in enumerate(self.groups):
            for j, b in enumerate(self.groups):
                cells.append({"from": a.name, "to": b.name,
                              "observed": int(self.observed[i, j]),
                              "expected": clean(self.expected[i, j]),
                              "ratio": clean(self.ratio[i, j]),
                              "stderr": clean(self.stderr[i, j])})
        return {"null": self.null, "n_links": self.n_links, "n_nodes": self.n_nodes,
                "sizes": self.sizes, "cells": cells}


def _node_groups(network, roles):
    groups = np.full(network.n_nodes, Role.NonSpreader, dtype=np.int8)
    if isinstance(roles, RoleAssignment):
        if roles.n_windows != 1:
            raise ValueError("group_link_density needs a single-window (static) assignment")
        names = roles.users[roles.user].astype(str)
        vals = roles.role
    else:
        names = np.array([str(k) for k in roles], dtype=str)
        vals = np.array([int(Role(v) if not isinstance(v, str) else Role[v])
                         for v in roles.values()], dtype=np.int8)
    if names.size:
        node_names = network.nodes.astype(str)
        pos = np.searchsorted(node_names, names)
        pos_c = np.minimum(pos, network.n_nodes - 1)
        ok = (pos < network.n_nodes) & (node_names[pos_c] == names)
        groups[pos[ok]] = vals[ok]
    return groups


def group_link_density(network, roles, null="uniform"):
    """Ratio of observed to null-expected links between role groups.

    Parameters
    ----------
    network : RetweetNetwork
    roles : RoleAssignment (single window) or mapping user id -> Role
        Nodes without a role count as NonSpreader.
    null : {"uniform", "configuration"}
        ``uniform`` places link units uniformly over ordered node pairs;
        ``configuration`` preserves out/in strengths (expected links
        ``S_out(A) * S_in(B) / L``).

    Returns
    -------
    DensityMatrix
        Ratios are NaN where the expected count is zero (empty group).
    """
    if null not in ("uniform", "configuration"):
        raise ValueError(f"unknown null model {null!r}")
    L = network.n_links
    N = network.n_nodes
    if N < 2 or L == 0:
        raise DegenerateNetwork(f"need >= 2 nodes and >= 1 link (N={N}, L={L})")
    g = _node_groups(network, roles)
    sizes = np.bincount(g, minlength=3)
    obs = np.bincount(g[network.src].astype(np.int64) * 3 + g[network.dst],
                      weights=network.weight, minlength=9).reshape(3, 3)
    exp = np.zeros((3, 3))
    se = np.full((3, 3), np.nan)
    if null == "uniform":
        for i in range(3):
            for j in range(3):
                exp[i, j] = expected_links_random(L, N, sizes[i], sizes[j], i == j)
        p = exp / L
        sd = np.sqrt(L * p * (1 - p))
        with np.errstate(divide="ignore", invalid="ignore"):
            se = np.where(exp > 0, sd / exp, np.nan)
    else:
        s_out = np.bincount(g, weights=network.out_strength(), minlength=3)
        s_in = np.bincount(g, weights=network.in_strength(), minlength=3)
        exp = np.outer(s_out, s_in) / L
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(exp > 0, obs / exp, np.nan)
    return DensityMatrix(GROUPS, {r.name: int(sizes[r]) for r in GROUPS},
                         obs.astype(np.int64), exp, ratio, se, L, N, null)


def write_density_json(records, stream):
    """Write one DensityMatrix, or a list of sweep records, as JSON."""
    if isinstance(stream, (str, os.PathLike)):
        with open(stream, "w", encoding="utf-8") as fh:
            return write_density_json(records, fh)
    if isinstance(records, DensityMatrix):
        payload = records.to_dict()
    else:
        payload = {"sweep": [r.to_dict() for r in records]}
    json.dump(payload, stream, indent=2, sort_keys=True)
    stream.write("\n")
