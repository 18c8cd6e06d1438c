"""Chunked exact Euclidean distances and k-nearest-neighbour search."""
import numpy as np

_BLOCK_ELEMS = 4_000_000


def _chunks(n_query, n_ref, n_feat):
    step = max(1, _BLOCK_ELEMS // max(1, n_ref * max(n_feat, 1)))
    for a in range(0, n_query, step):
        yield a, min(n_query, a + step)


def sq_dists(query, ref):
    """Squared distances computed from differences (exact zeros stay zero)."""
    query = np.asarray(query, dtype=float)
    ref = np.asarray(ref, dtype=float)
    out = np.empty((len(query), len(ref)))
    for a, b in _chunks(len(query), len(ref), query.shape[1]):
        diff = query[a:b, None, :] - ref[None, :, :]
        out[a:b] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def knn(query, ref, k, exclude_self=False):
    """Indices (q, k) and distances of the k nearest ``ref`` rows per query.

    Ties are broken by the lower reference index. With ``exclude_self`` the
    query set must be ``ref`` and row i never lists itself.
    """
    query = np.asarray(query, dtype=float)
    ref = np.asarray(ref, dtype=float)
    k = min(k, len(ref) - (1 if exclude_self else 0))
    idx = np.empty((len(query), k), dtype=int)
    dist = np.empty((len(query), k))
    for a, b in _chunks(len(query), len(ref), query.shape[1]):
        diff = query[a:b, None, :] - ref[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        if exclude_self:
            d2[np.arange(b - a), np.arange(a, b)] = np.inf
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        idx[a:b] = order
        dist[a:b] = np.sqrt(np.take_along_axis(d2, order, axis=1))
    return idx, dist
