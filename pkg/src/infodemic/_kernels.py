"""Compiled nearest-neighbour kernels for simplex cross-mapping.

Library indices must be sorted ascending so that strict ``<`` insertion keeps
the earlier time index first among equidistant neighbours.
"""

import os

import numpy as np
from numba import config as _numba_config, njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    _numba_config.THREADING_LAYER = "omp"


@njit(cache=True)
def _embed(x, E, tau):
    n_pts = x.shape[0] - (E - 1) * tau
    out = np.empty((n_pts, E))
    for j in range(n_pts):
        t = j + (E - 1) * tau
        for c in range(E):
            out[j, c] = x[t - c * tau]
    return out


@njit(cache=True)
def _neighbours(M, lib, pred, k, nb_idx, nb_dist):
    """Fill ``nb_idx``/``nb_dist`` with the k nearest library points of each prediction point.

    The prediction point itself is excluded from its own neighbour set.
    """
    E = M.shape[1]
    for p in range(pred.shape[0]):
        q = pred[p]
        for m in range(k):
            nb_dist[p, m] = np.inf
            nb_idx[p, m] = -1
        for jj in range(lib.shape[0]):
            j = lib[jj]
            if j == q:
                continue
            s = 0.0
            for c in range(E):
                diff = M[q, c] - M[j, c]
                s += diff * diff
            d = np.sqrt(s)
            if d < nb_dist[p, k - 1]:
                m = k - 1
                while m > 0 and d < nb_dist[p, m - 1]:
                    nb_dist[p, m] = nb_dist[p, m - 1]
                    nb_idx[p, m] = nb_idx[p, m - 1]
                    m -= 1
                nb_dist[p, m] = d
                nb_idx[p, m] = j


@njit(cache=True)
def _weights(nb_dist, w):
    """Exponential simplex weights, normalised to sum to one per row.

    Zero-distance neighbours share weight 1 each; positive distances are
    scaled by the smallest positive distance in the row.
    """
    n, k = nb_dist.shape
    for p in range(n):
        eps = np.inf
        for m in range(k):
            d = nb_dist[p, m]
            if d > 0.0 and d < eps:
                eps = d
        total = 0.0
        for m in range(k):
            d = nb_dist[p, m]
            if d == 0.0:
                u = 1.0
            else:
                u = np.exp(-d / eps)
            w[p, m] = u
            total += u
        for m in range(k):
            w[p, m] /= total


@njit(cache=True)
def _pearson(a, b):
    n = a.shape[0]
    ma = 0.0
    mb = 0.0
    for i in range(n):
        ma += a[i]
        mb += b[i]
    ma /= n
    mb /= n
    sab = 0.0
    saa = 0.0
    sbb = 0.0
    for i in range(n):
        da = a[i] - ma
        db = b[i] - mb
        sab += da * db
        saa += da * da
        sbb += db * db
    if saa == 0.0 or sbb == 0.0:
        return np.nan
    r = sab / np.sqrt(saa * sbb)
    if r > 1.0:
        r = 1.0
    elif r < -1.0:
        r = -1.0
    return r


@njit(cache=True)
def simplex_estimates(M, target_at, lib, pred, k):
    """Cross-map estimates for each prediction point.

    ``target_at[j]`` is the (already time-shifted) target value paired with
    manifold point ``j``.  Returns ``(estimates, nb_idx, weights)``.
    """
    n = pred.shape[0]
    nb_idx = np.empty((n, k), dtype=np.int64)
    nb_dist = np.empty((n, k))
    w = np.empty((n, k))
    _neighbours(M, lib, pred, k, nb_idx, nb_dist)
    _weights(nb_dist, w)
    est = np.empty(n)
    for p in range(n):
        s = 0.0
        for m in range(k):
            s += w[p, m] * target_at[nb_idx[p, m]]
        est[p] = s
    return est, nb_idx, w


@njit(cache=True)
def cross_map_rho(M, target_at, lib, pred, k):
    est, _, _ = simplex_estimates(M, target_at, lib, pred, k)
    obs = np.empty(pred.shape[0])
    for p in range(pred.shape[0]):
        obs[p] = target_at[pred[p]]
    return _pearson(obs, est)


@njit(cache=True, parallel=True)
def surrogate_rhos(sources, target_at, E, tau, lib, pred, k):
    """Skill for each row of ``sources`` (one permuted source per row)."""
    S = sources.shape[0]
    out = np.empty(S)
    for s in prange(S):
        M = _embed(sources[s], E, tau)
        out[s] = cross_map_rho(M, target_at, lib, pred, k)
    return out


def embed(x, E, tau):
    return _embed(np.ascontiguousarray(x, dtype=np.float64), E, tau)
