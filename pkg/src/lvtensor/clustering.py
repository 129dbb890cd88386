"""Tucker-PCA clustering: principal components of one mode, then k-means."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ArgumentError
from .estimators import RankRule, TuckerFactorization, dse, hooi
from .generators import make_rng
from .tensor import unfold


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    centroids: np.ndarray
    wcss: float
    k: int
    metadata: dict = field(default_factory=dict)


def mode_principal_components(fact: TuckerFactorization, mode: int) -> np.ndarray:
    """Rows of ``U_mode @ unfold(core, mode)``: one score vector per index of ``mode``."""
    if not 0 <= mode < fact.core.ndim:
        raise ArgumentError(f"mode {mode + 1} out of range for an order-{fact.core.ndim} factorization")
    return fact.factors[mode] @ unfold(fact.core, mode)


def _sqdist(x, c):
    d = (x * x).sum(1)[:, None] - 2.0 * x @ c.T + (c * c).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _wcss(x, labels, centroids):
    return float(((x - centroids[labels]) ** 2).sum())


def _plusplus(x, k, rng):
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    closest = ((x - centers[0]) ** 2).sum(1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(x[idx])
        closest = np.minimum(closest, ((x - x[idx]) ** 2).sum(1))
    return np.array(centers)


def _lloyd(x, centroids, max_iters):
    """Lloyd iterations. Empty clusters are reseeded at the worst-fitted point."""
    k = centroids.shape[0]
    centroids = centroids.copy()
    labels = np.argmin(_sqdist(x, centroids), axis=1)
    history = []
    for _ in range(max_iters):
        for j in range(k):
            if not np.any(labels == j):
                resid = ((x - centroids[labels]) ** 2).sum(1)
                # never steal the last member of another cluster
                sizes = np.bincount(labels, minlength=k)
                resid[sizes[labels] <= 1] = -1.0
                far = int(np.argmax(resid))
                labels[far] = j
                centroids[j] = x[far]
        for j in range(k):
            centroids[j] = x[labels == j].mean(0)
        history.append(_wcss(x, labels, centroids))
        new = np.argmin(_sqdist(x, centroids), axis=1)
        # keep the current label on exact ties so wcss cannot go up
        cur = ((x - centroids[labels]) ** 2).sum(1)
        alt = ((x - centroids[new]) ** 2).sum(1)
        new = np.where(alt < cur, new, labels)
        if np.array_equal(new, labels):
            break
        labels = new
    return labels, centroids, history


def _canonical(labels, centroids):
    """Relabel by decreasing cluster size, ties by smallest member index."""
    k = centroids.shape[0]
    sizes = np.bincount(labels, minlength=k)
    first = np.array([np.flatnonzero(labels == j)[0] if sizes[j] else len(labels) for j in range(k)])
    order = sorted(range(k), key=lambda j: (-sizes[j], first[j]))
    remap = np.empty(k, dtype=np.int64)
    remap[order] = np.arange(k)
    return remap[labels], centroids[order]


def kmeans(data, k: int, restarts: int = 10, max_iters: int = 300, seed: int = 0,
           init_candidates=None) -> ClusterAssignment:
    """Best-of-``restarts`` Lloyd k-means with k-means++ seeding.

    ``init_candidates`` optionally adds explicit ``(k, p)`` starting
    centroid sets, tried before the random restarts. The winner is the
    run with the lowest wcss, ties going to the earlier run.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ArgumentError(f"expected a 2-d data matrix, got shape {x.shape}")
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ArgumentError(f"k={k} must lie in [1, {n}]")
    if restarts < 1 or max_iters < 1:
        raise ArgumentError("restarts and max_iters must be >= 1")
    rng = make_rng(seed)
    starts = [np.asarray(c, dtype=np.float64) for c in (init_candidates or [])]
    starts += [None] * restarts
    best = None
    for start in starts:
        init = _plusplus(x, k, rng) if start is None else start
        labels, centroids, history = _lloyd(x, init, max_iters)
        wcss = _wcss(x, labels, centroids)
        if best is None or wcss < best[2]:
            best = (labels, centroids, wcss, history)
    labels, centroids = _canonical(best[0], best[1])
    return ClusterAssignment(labels, centroids, best[2], k, {"wcss_history": best[3], "seed": seed})


def _extend(x, prev: ClusterAssignment, k):
    """Grow a solution to ``k`` centroids by adding the worst-fitted points."""
    centroids = prev.centroids.copy()
    while centroids.shape[0] < k:
        d = _sqdist(x, centroids).min(1)
        centroids = np.vstack([centroids, x[int(np.argmax(d))]])
    return centroids[:k]


def elbow_curve(data, k_grid, restarts: int = 10, seed: int = 0, max_iters: int = 300) -> list:
    """``[(k, wcss), ...]`` over ``k_grid`` (sorted ascending).

    The best solution at the previous ``k`` (grown by farthest points) is
    one of the starts at the next ``k``, so wcss is non-increasing.
    """
    x = np.asarray(data, dtype=np.float64)
    out = []
    prev = None
    for k in sorted(int(k) for k in k_grid):
        extra = [_extend(x, prev, k)] if prev is not None else None
        prev = kmeans(x, k, restarts, max_iters, seed, init_candidates=extra)
        out.append((k, prev.wcss))
    return out


def cluster_mode(y, rule: RankRule, mode: int, k: int, restarts: int = 10, seed: int = 0,
                 refine: bool = True, max_iters: int = 50, tol: float = 1e-7) -> ClusterAssignment:
    """DSE estimate, optional HOOI refinement, mode principal components, k-means."""
    y = np.asarray(y, dtype=np.float64)
    ranks = rule.resolve(y.shape)
    _, fact = dse(y, ranks)
    iters = 0
    if refine:
        res = hooi(y, ranks, max_iters, tol, init=list(fact.factors))
        fact, iters = res.factorization, res.iterations
    scores = mode_principal_components(fact, mode)
    out = kmeans(scores, k, restarts=restarts, seed=seed)
    out.metadata.update({"ranks": ranks, "mode": mode, "refined_with_hooi": refine,
                         "hooi_iterations": iters})
    return out


def matched_agreement(labels, truth) -> float:
    """Fraction of rows whose label agrees with ``truth`` under the best label matching."""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    a, b = np.unique(labels, return_inverse=True)[1], np.unique(truth, return_inverse=True)[1]
    m = np.zeros((a.max() + 1, b.max() + 1))
    np.add.at(m, (a, b), 1)
    rows, cols = linear_sum_assignment(-m)
    return float(m[rows, cols].sum() / len(labels))
