"""Convergent cross mapping.

Delay embedding, simplex cross-map estimation, convergence with library
size, time-delay scanning and permutation-surrogate significance testing.

Direction convention: ``cross_map(source, target)`` reconstructs the target
from the source's shadow manifold.  High skill is evidence that the *target*
drives the *source*.
"""

from dataclasses import dataclass, field, asdict
import logging

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator

from . import _kernels
from ._validation import check_paired_series, check_positive_int, check_series
from .errors import DegenerateTarget, SeriesTooShort

logger = logging.getLogger(__name__)

MAX_EMBEDDING_DIM = 10


@dataclass(frozen=True)
class EmbeddingConfig:
    embedding_dim: int = 2
    tau: int = 1

    def __post_init__(self):
        check_positive_int(self.embedding_dim, "embedding_dim")
        check_positive_int(self.tau, "tau")


@dataclass(frozen=True)
class ShadowManifold:
    """Delay-coordinate reconstruction of a scalar series.

    Row ``j`` is ``(x[t], x[t - tau], ..., x[t - (E-1)*tau])`` with
    ``t = j + offset``.
    """

    points: np.ndarray
    embedding_dim: int
    tau: int

    @property
    def offset(self):
        return (self.embedding_dim - 1) * self.tau

    @property
    def times(self):
        return np.arange(self.points.shape[0]) + self.offset

    def __len__(self):
        return self.points.shape[0]


@dataclass
class CcmConfig:
    """Cross-mapping parameters.

    ``embedding_dim=None`` selects E per source series by simplex
    self-prediction; ``n_neighbors=None`` means E + 1; ``library_sizes=None``
    means a geometric ladder from 4E up to every available point.
    """

    embedding_dim: int = None
    tau: int = 1
    library_sizes: tuple = None
    n_neighbors: int = None
    n_surrogates: int = 1000
    library_sampling: str = "first"
    n_library_samples: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.embedding_dim is not None:
            check_positive_int(self.embedding_dim, "embedding_dim")
        check_positive_int(self.tau, "tau")
        if self.n_neighbors is not None:
            check_positive_int(self.n_neighbors, "n_neighbors")
        check_positive_int(self.n_surrogates, "n_surrogates", minimum=0)
        if self.library_sampling not in ("first", "random"):
            raise ValueError("library_sampling must be 'first' or 'random'")
        check_positive_int(self.n_library_samples, "n_library_samples")
        if self.library_sizes is not None:
            sizes = tuple(int(s) for s in self.library_sizes)
            if any(b <= a for a, b in zip(sizes, sizes[1:])):
                raise ValueError("library_sizes must be strictly increasing")
            self.library_sizes = sizes


@dataclass
class CrossMapResult:
    times: np.ndarray
    observed: np.ndarray
    estimates: np.ndarray
    rho: float
    library_size: int
    td: int
    embedding_dim: int


@dataclass
class ConvergenceProfile:
    library_sizes: np.ndarray
    rho: np.ndarray
    kendall_tau: float
    kendall_p: float
    delta: float

    @property
    def converges(self):
        return self.delta > 0 and self.kendall_tau > 0 and self.kendall_p < 0.05


@dataclass
class LaggedCcm:
    tds: np.ndarray
    rho_x_xmap_y: np.ndarray
    rho_y_xmap_x: np.ndarray
    library_size: int
    embedding_dim_x: int
    embedding_dim_y: int

    @property
    def peak_td_x_xmap_y(self):
        return int(self.tds[np.nanargmax(self.rho_x_xmap_y)])

    @property
    def peak_td_y_xmap_x(self):
        return int(self.tds[np.nanargmax(self.rho_y_xmap_x)])


@dataclass
class CcmRow:
    direction: str
    td: int
    L: int
    rho: float
    surrogate_p95: float
    significant: bool


@dataclass
class CcmResult:
    """Skill, surrogate distributions and significance per tested delay."""

    direction: str
    embedding_dim: int
    tau: int
    n_neighbors: int
    library_size: int
    tds: np.ndarray
    rho: np.ndarray
    surrogates: np.ndarray  # shape (len(tds), n_surrogates)
    p95: np.ndarray
    significant: np.ndarray
    convergence: ConvergenceProfile = field(default=None)

    def rows(self):
        return [
            CcmRow(self.direction, int(td), int(self.library_size), float(r),
                   float(q), bool(s))
            for td, r, q, s in zip(self.tds, self.rho, self.p95, self.significant)
        ]

    def to_records(self):
        return [asdict(r) for r in self.rows()]


def delay_embed(series, embedding_dim, tau=1):
    """Build the shadow manifold of ``series``.

    Parameters
    ----------
    series : array-like of shape (n,)
    embedding_dim : int
        Number of delay coordinates E.
    tau : int, default=1
        Lag between coordinates, in samples.

    Returns
    -------
    ShadowManifold
        ``n - (E-1)*tau`` points; the first is ``(x[(E-1)tau], ..., x[0])``.

    Raises
    ------
    SeriesTooShort
        If ``(E-1)*tau >= n - 1``, i.e. fewer than two points would remain.
    MissingValues
        If the series contains NaN.
    """
    if isinstance(embedding_dim, EmbeddingConfig):
        embedding_dim, tau = embedding_dim.embedding_dim, embedding_dim.tau
    x = check_series(series)
    E = check_positive_int(embedding_dim, "embedding_dim")
    tau = check_positive_int(tau, "tau")
    n = x.shape[0]
    if E == 1:
        if n < 1:
            raise SeriesTooShort("empty series")
    elif (E - 1) * tau >= n - 1:
        raise SeriesTooShort(
            f"series of length {n} too short for E={E}, tau={tau}")
    return ShadowManifold(_kernels.embed(x, E, tau), E, tau)


def _valid_indices(n, offset, td):
    """Manifold indices j whose target time ``j + offset + td`` lies in range."""
    n_pts = n - offset
    lo = max(0, -(offset + td))
    hi = min(n_pts, n - offset - td)
    if hi <= lo:
        return np.empty(0, dtype=np.int64)
    return np.arange(lo, hi, dtype=np.int64)


def _target_at(target, n_pts, offset, td):
    out = np.full(n_pts, np.nan)
    j = _valid_indices(target.shape[0], offset, td)
    out[j] = target[j + offset + td]
    return out


def _library(valid, size, sampling, rng):
    if size > valid.shape[0]:
        raise SeriesTooShort(
            f"library size {size} exceeds {valid.shape[0]} available points")
    if sampling == "first":
        return valid[:size]
    return np.sort(rng.choice(valid, size=size, replace=False))


def select_embedding_dim(series, tau=1, max_dim=MAX_EMBEDDING_DIM):
    """Choose E by leave-one-out simplex forecast skill one step ahead.

    Returns ``(best_E, skills)`` where ``skills[i]`` is the skill for E = i + 1;
    ties go to the smaller E.
    """
    x = check_series(series)
    n = x.shape[0]
    skills = np.full(max_dim, np.nan)
    for E in range(1, max_dim + 1):
        offset = (E - 1) * tau
        if n - offset - 1 < E + 3:
            break
        M = _kernels.embed(x, E, tau)
        tgt = _target_at(x, M.shape[0], offset, 1)
        valid = _valid_indices(n, offset, 1)
        skills[E - 1] = _kernels.cross_map_rho(M, tgt, valid, valid, E + 1)
    if np.all(np.isnan(skills)):
        raise SeriesTooShort(f"series of length {n} too short to select E")
    return int(np.nanargmax(skills)) + 1, skills


def _resolve(source, config):
    E = config.embedding_dim
    if E is None:
        E, _ = select_embedding_dim(source, config.tau)
    k = config.n_neighbors if config.n_neighbors is not None else E + 1
    return E, k


def default_library_sizes(n_available, embedding_dim, n_steps=8):
    lo = 4 * embedding_dim
    if n_available <= lo:
        return (n_available,)
    ladder = np.unique(np.round(np.geomspace(lo, n_available, n_steps)).astype(int))
    return tuple(int(v) for v in ladder)


def cross_map(source, target, library_size=None, td=0, config=None, rng=None):
    """Estimate ``target(t + td)`` from the shadow manifold of ``source``.

    Each prediction point takes its k nearest library neighbours (itself
    excluded), weights them by ``exp(-d / d_min)`` and averages the target
    values at the neighbours' times shifted by ``td``.

    Returns
    -------
    CrossMapResult
    """
    config = config or CcmConfig()
    x, y = check_paired_series(source, target)
    E, k = _resolve(x, config)
    n = x.shape[0]
    offset = (E - 1) * config.tau
    if offset >= n - 1:
        raise SeriesTooShort(f"series of length {n} too short for E={E}")
    M = _kernels.embed(x, E, config.tau)
    valid = _valid_indices(n, offset, td)
    if library_size is None:
        library_size = valid.shape[0]
    if library_size < k + 1:
        raise SeriesTooShort(
            f"library size {library_size} below minimum {k + 1} for k={k}")
    tgt = _target_at(y, M.shape[0], offset, td)
    obs = tgt[valid]
    if np.ptp(obs) == 0:
        raise DegenerateTarget("observed target values are constant")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    lib = _library(valid, library_size, config.library_sampling, rng)
    est, _, _ = _kernels.simplex_estimates(M, tgt, lib, valid, k)
    rho = _kernels._pearson(obs, est)
    if np.isnan(rho):
        # constant estimates carry no skill
        rho = 0.0
    return CrossMapResult(valid + offset, obs, est, float(rho), int(library_size),
                          int(td), E)


def _rho_at(M, tgt, valid, size, k, config, rng):
    reps = config.n_library_samples if config.library_sampling == "random" else 1
    vals = []
    for _ in range(reps):
        lib = _library(valid, size, config.library_sampling, rng)
        r = _kernels.cross_map_rho(M, tgt, lib, valid, k)
        vals.append(0.0 if np.isnan(r) else r)
    return float(np.mean(vals))


def convergence_profile(source, target, config=None, td=0):
    """Cross-map skill as a function of library size.

    The trend statistic is Kendall's tau between library size and skill;
    ``delta`` is skill at the largest library minus skill at the smallest.
    """
    config = config or CcmConfig()
    x, y = check_paired_series(source, target)
    E, k = _resolve(x, config)
    n = x.shape[0]
    offset = (E - 1) * config.tau
    M = _kernels.embed(x, E, config.tau)
    valid = _valid_indices(n, offset, td)
    sizes = config.library_sizes or default_library_sizes(valid.shape[0], E)
    if len(sizes) < 2:
        raise ValueError("convergence_profile needs at least two library sizes")
    if sizes[0] < k + 1:
        raise SeriesTooShort(f"smallest library {sizes[0]} below minimum {k + 1}")
    tgt = _target_at(y, M.shape[0], offset, td)
    if np.ptp(tgt[valid]) == 0:
        raise DegenerateTarget("observed target values are constant")
    rng = np.random.default_rng(config.seed)
    rho = np.array([_rho_at(M, tgt, valid, L, k, config, rng) for L in sizes])
    kt = stats.kendalltau(sizes, rho)
    tau_stat = 0.0 if np.isnan(kt.statistic) else float(kt.statistic)
    p = 1.0 if np.isnan(kt.pvalue) else float(kt.pvalue)
    return ConvergenceProfile(np.asarray(sizes), rho, tau_stat, p,
                              float(rho[-1] - rho[0]))


def _largest_common_library(n, offset, tds):
    return min(_valid_indices(n, offset, td).shape[0] for td in tds)


def lagged_ccm(x, y, tds, config=None, library_size=None):
    """Skill in both directions for each time delay in ``tds``.

    All delays use the same library size, the largest one available to every
    delay unless ``library_size`` is given.
    """
    config = config or CcmConfig()
    x, y = check_paired_series(x, y)
    tds = np.asarray(list(tds), dtype=np.int64)
    if tds.size == 0:
        raise ValueError("tds must not be empty")
    out = {}
    dims = {}
    for name, src, tgt in (("x_xmap_y", x, y), ("y_xmap_x", y, x)):
        E, k = _resolve(src, config)
        dims[name] = E
        n = src.shape[0]
        offset = (E - 1) * config.tau
        M = _kernels.embed(src, E, config.tau)
        L = library_size or _largest_common_library(n, offset, tds)
        if L < k + 1:
            raise SeriesTooShort(f"delays leave {L} usable points, need {k + 1}")
        rng = np.random.default_rng(config.seed)
        vals = []
        for td in tds:
            valid = _valid_indices(n, offset, int(td))
            t_at = _target_at(tgt, M.shape[0], offset, int(td))
            if np.ptp(t_at[valid]) == 0:
                raise DegenerateTarget("observed target values are constant")
            vals.append(_rho_at(M, t_at, valid, L, k, config, rng))
        out[name] = np.array(vals)
    L_out = library_size or min(
        _largest_common_library(x.shape[0], (dims[d] - 1) * config.tau, tds)
        for d in dims)
    return LaggedCcm(tds, out["x_xmap_y"], out["y_xmap_x"], int(L_out),
                     dims["x_xmap_y"], dims["y_xmap_x"])


def _replicate_permutations(n, n_surrogates, seed):
    children = np.random.SeedSequence(seed).spawn(n_surrogates)
    return np.stack([np.random.default_rng(c).permutation(n) for c in children])


def surrogate_test(source, target, config=None, tds=(0,), direction=None,
                   library_size=None):
    """Permutation-surrogate significance of the cross-map skill.

    Each surrogate cross-maps the target from a freshly permuted copy of the
    source (per-replicate seeds are spawned from ``config.seed``).  The
    observed skill is significant when it exceeds the 95th percentile of the
    surrogate skills.

    Returns
    -------
    CcmResult
    """
    config = config or CcmConfig()
    if config.n_surrogates < 1:
        raise ValueError("surrogate_test needs n_surrogates >= 1")
    if config.n_surrogates < 100:
        logger.warning("only %d surrogates; the 95th percentile is unreliable",
                       config.n_surrogates)
    x, y = check_paired_series(source, target)
    tds = np.asarray(list(tds), dtype=np.int64)
    E, k = _resolve(x, config)
    n = x.shape[0]
    offset = (E - 1) * config.tau
    M = _kernels.embed(x, E, config.tau)
    L = library_size or _largest_common_library(n, offset, tds)
    if L < k + 1:
        raise SeriesTooShort(f"delays leave {L} usable points, need {k + 1}")
    perms = _replicate_permutations(n, config.n_surrogates, config.seed)
    sources = np.ascontiguousarray(x[perms])
    rng = np.random.default_rng(config.seed)
    rho = np.empty(tds.size)
    surr = np.empty((tds.size, config.n_surrogates))
    for i, td in enumerate(tds):
        valid = _valid_indices(n, offset, int(td))
        t_at = _target_at(y, M.shape[0], offset, int(td))
        if np.ptp(t_at[valid]) == 0:
            raise DegenerateTarget("observed target values are constant")
        lib = _library(valid, L, config.library_sampling, rng)
        r = _kernels.cross_map_rho(M, t_at, lib, valid, k)
        rho[i] = 0.0 if np.isnan(r) else r
        s = _kernels.surrogate_rhos(sources, t_at, E, config.tau, lib, valid, k)
        surr[i] = np.where(np.isnan(s), 0.0, s)
    p95 = np.percentile(surr, 95, axis=1)
    return CcmResult(direction or "source_xmap_target", E, config.tau, k, int(L),
                     tds, rho, surr, p95, rho > p95)


class CCM(BaseEstimator):
    """Convergent cross mapping between two series, scikit-learn style.

    ``fit(x, y)`` stores the pair and resolves embedding dimensions;
    ``score`` returns the cross-map skill of one direction, and
    ``test`` runs the lagged surrogate analysis in both directions.

    Parameters
    ----------
    embedding_dim : int or None
        E; ``None`` selects E per source series.
    tau : int
    library_sizes : sequence of int or None
    n_neighbors : int or None
    n_surrogates : int
    library_sampling : {"first", "random"}
    seed : int
    """

    def __init__(self, embedding_dim=None, tau=1, library_sizes=None,
                 n_neighbors=None, n_surrogates=1000, library_sampling="first",
                 seed=0):
        self.embedding_dim = embedding_dim
        self.tau = tau
        self.library_sizes = library_sizes
        self.n_neighbors = n_neighbors
        self.n_surrogates = n_surrogates
        self.library_sampling = library_sampling
        self.seed = seed

    def _config(self, embedding_dim=None):
        return CcmConfig(
            embedding_dim=embedding_dim if embedding_dim is not None else self.embedding_dim,
            tau=self.tau, library_sizes=self.library_sizes,
            n_neighbors=self.n_neighbors, n_surrogates=self.n_surrogates,
            library_sampling=self.library_sampling, seed=self.seed)

    def fit(self, X, y):
        self.x_, self.y_ = check_paired_series(X, y)
        cfg = self._config()
        self.embedding_dim_x_, _ = _resolve(self.x_, cfg)
        self.embedding_dim_y_, _ = _resolve(self.y_, cfg)
        return self

    def _pair(self, direction):
        if direction == "x_xmap_y":
            return self.x_, self.y_, self._config(self.embedding_dim_x_)
        if direction == "y_xmap_x":
            return self.y_, self.x_, self._config(self.embedding_dim_y_)
        raise ValueError(f"unknown direction {direction!r}")

    def predict(self, direction="x_xmap_y", td=0, library_size=None):
        src, tgt, cfg = self._pair(direction)
        return cross_map(src, tgt, library_size, td, cfg).estimates

    def score(self, direction="x_xmap_y", td=0, library_size=None):
        src, tgt, cfg = self._pair(direction)
        return cross_map(src, tgt, library_size, td, cfg).rho

    def convergence(self, direction="x_xmap_y", td=0):
        src, tgt, cfg = self._pair(direction)
        return convergence_profile(src, tgt, cfg, td)

    def lagged(self, tds):
        cfg = self._config()
        return lagged_ccm(self.x_, self.y_, tds, cfg)

    def test(self, tds=(0,), with_convergence=True):
        """Surrogate test over ``tds`` for both directions; returns a list of CcmResult."""
        results = []
        for direction in ("x_xmap_y", "y_xmap_x"):
            src, tgt, cfg = self._pair(direction)
            res = surrogate_test(src, tgt, cfg, tds, direction=direction)
            if with_convergence:
                res.convergence = convergence_profile(src, tgt, cfg)
            results.append(res)
        return results
