"""Spectral estimators for a low-rank-approximable signal tensor.

* :func:`hosvd` projects the data once onto the leading subspaces of each
  unfolding.
* :func:`dse` (double projection) re-estimates each mode's subspace after
  projecting the data on the other modes' first-pass subspaces.
* :func:`hooi` alternates that refinement until the core norm settles; it
  is a local solver for the rank-constrained least-squares problem, and
  :func:`approx_lse` wraps it with restarts.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError
from .generators import make_rng
from .linalg import random_orthonormal, svd_top_left
from .tensor import frobenius_norm, multilinear_multiply, unfold

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TuckerFactorization:
    core: np.ndarray
    factors: tuple

    @property
    def ranks(self):
        return self.core.shape

    def reconstruct(self) -> np.ndarray:
        return multilinear_multiply(self.core, list(enumerate(self.factors)))


@dataclass(frozen=True)
class RankRule:
    """Either explicit per-mode ranks or ``r = ceil(c * log(max_k d_k) ** exponent)``."""

    ranks: tuple | None = None
    c: float | None = None
    exponent: int = 1

    def __post_init__(self):
        if (self.ranks is None) == (self.c is None):
            raise ArgumentError("give exactly one of explicit ranks or a log-rule constant c")
        if self.c is not None and self.c <= 0:
            raise ArgumentError(f"log-rule constant must be positive, got {self.c}")
        if self.exponent < 1:
            raise ArgumentError(f"log-rule exponent must be >= 1, got {self.exponent}")

    @classmethod
    def log_rule(cls, c: float, exponent: int = 1) -> "RankRule":
        return cls(c=float(c), exponent=int(exponent))

    @classmethod
    def explicit(cls, ranks) -> "RankRule":
        return cls(ranks=tuple(int(r) for r in ranks))

    def raw(self, dims: Sequence[int]) -> tuple:
        """Ranks before any clamping."""
        if self.ranks is not None:
            ranks = tuple(self.ranks)
            if len(ranks) == 1:
                ranks = ranks * len(dims)
            if len(ranks) != len(dims):
                raise ArgumentError(f"{len(ranks)} ranks for an order-{len(dims)} tensor")
            return ranks
        r = math.ceil(self.c * math.log(max(dims)) ** self.exponent)
        return (r,) * len(dims)

    def resolve(self, dims: Sequence[int], clamp: bool = True) -> tuple:
        """Per-mode ranks; out-of-range values are clamped to ``[1, d_k]`` (or rejected)."""
        raw = self.raw(dims)
        out = []
        for k, (r, d) in enumerate(zip(raw, dims)):
            if 1 <= r <= d:
                out.append(r)
            elif clamp:
                log.warning("rank %d clamped to [1, %d] at mode %d", r, d, k + 1)
                out.append(min(max(r, 1), d))
            else:
                raise ArgumentError(f"rank {r} outside [1, {d}] at mode {k + 1}")
        return tuple(out)


def _check_ranks(y, ranks):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != y.ndim:
        raise ArgumentError(f"{len(ranks)} ranks for an order-{y.ndim} tensor")
    for k, (r, d) in enumerate(zip(ranks, y.shape)):
        if not 1 <= r <= d:
            raise ArgumentError(f"rank {r} outside [1, {d}] at mode {k + 1}")
    return ranks


def _top_basis(mat, r, fallback=None):
    """Top-``r`` left singular vectors, completed to ``r`` columns when ``mat`` has fewer.

    Extra columns only arise when ``r`` exceeds the product of the other
    ranks; they cannot change the estimate, so any orthonormal completion
    works. It is taken from ``fallback`` when given, else from the identity.
    """
    q = min(r, mat.shape[1])
    u = svd_top_left(mat, q)
    if q < r:
        base = np.eye(mat.shape[0]) if fallback is None else fallback
        rest = base - u @ (u.T @ base)
        u = np.hstack([u, svd_top_left(rest, r - q)])
    return u


def _leading_subspaces(y, ranks):
    return [_top_basis(unfold(y, k), r) for k, r in enumerate(ranks)]


def _refine(y, bases, k, r):
    """Leading mode-k subspace of ``y`` projected on every other mode's basis."""
    z = multilinear_multiply(y, [(j, u.T) for j, u in enumerate(bases) if j != k])
    return _top_basis(unfold(z, k), r, bases[k])


def _factorize(y, bases):
    core = multilinear_multiply(y, [(k, u.T) for k, u in enumerate(bases)])
    fact = TuckerFactorization(core, tuple(bases))
    return fact.reconstruct(), fact


def hosvd(y, ranks):
    """Truncated higher-order SVD. Returns ``(estimate, factorization)``."""
    y = np.asarray(y, dtype=np.float64)
    ranks = _check_ranks(y, ranks)
    return _factorize(y, _leading_subspaces(y, ranks))


def dse(y, ranks):
    """Double-projection spectral estimate. Returns ``(estimate, factorization)``."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim < 2:
        raise ArgumentError("double projection needs a tensor of order >= 2")
    ranks = _check_ranks(y, ranks)
    first = _leading_subspaces(y, ranks)
    second = [_refine(y, first, k, r) for k, r in enumerate(ranks)]
    return _factorize(y, second)


@dataclass
class HooiResult:
    estimate: np.ndarray
    factorization: TuckerFactorization
    iterations: int
    fit_history: list = field(default_factory=list)


def hooi(y, ranks, max_iters: int = 50, tol: float = 1e-7, init=None) -> HooiResult:
    """Higher-order orthogonal iteration.

    Starts from the HOSVD subspaces unless ``init`` (a list of orthonormal
    factors) is given. Each sweep updates modes in ascending order, each
    update using the latest factors of the other modes. Stops when the
    relative change of the core norm drops below ``tol`` or after
    ``max_iters`` sweeps. ``fit_history`` holds the core norm before the
    first sweep and after each sweep.
    """
    y = np.asarray(y, dtype=np.float64)
    ranks = _check_ranks(y, ranks)
    if max_iters < 1:
        raise ArgumentError("max_iters must be >= 1")
    if not tol > 0:
        raise ArgumentError("tol must be positive")
    bases = list(init) if init is not None else _leading_subspaces(y, ranks)
    core = multilinear_multiply(y, [(k, u.T) for k, u in enumerate(bases)])
    history = [frobenius_norm(core)]
    it = 0
    for it in range(1, max_iters + 1):
        for k, r in enumerate(ranks):
            bases[k] = _refine(y, bases, k, r)
        core = multilinear_multiply(y, [(k, u.T) for k, u in enumerate(bases)])
        history.append(frobenius_norm(core))
        prev, cur = history[-2], history[-1]
        if abs(cur - prev) <= tol * max(cur, np.finfo(float).tiny):
            break
    fact = TuckerFactorization(core, tuple(bases))
    return HooiResult(fact.reconstruct(), fact, it, history)


def approx_lse(y, rule: RankRule | Sequence[int], restarts: int = 1, seed: int = 0,
               max_iters: int = 50, tol: float = 1e-7) -> np.ndarray:
    """Heuristic rank-constrained least squares: best of several HOOI runs.

    The exact problem is NP-hard; this returns the lowest-residual HOOI
    solution over the HOSVD start plus ``restarts - 1`` random orthonormal
    starts.
    """
    y = np.asarray(y, dtype=np.float64)
    if restarts < 1:
        raise ArgumentError("restarts must be >= 1")
    ranks = rule.resolve(y.shape) if isinstance(rule, RankRule) else _check_ranks(y, rule)
    rng = make_rng(seed)
    best, best_res = None, np.inf
    for i in range(restarts):
        init = None if i == 0 else [random_orthonormal(d, r, rng) for d, r in zip(y.shape, ranks)]
        est = hooi(y, ranks, max_iters, tol, init=init).estimate
        res = frobenius_norm(y - est)
        if res < best_res:
            best, best_res = est, res
    return best


def select_rank_cv(y, c_grid: Sequence[float], s_exponent: int = 1, folds: int = 5, seed: int = 0):
    """Pick the log-rule constant by entrywise K-fold cross-validation.

    Entry positions are split at random into ``folds`` groups. For each
    group, its entries are replaced by the mean of the retained entries,
    :func:`dse` is run at each candidate rank, and the held-out squared
    error against the observed values is recorded. Returns ``(best_c,
    ranks, table)`` where ``table`` has one dict per grid value; values of
    ``c`` whose rank falls outside ``[1, min d_k]`` are marked skipped.
    """
    y = np.asarray(y, dtype=np.float64)
    if folds < 2:
        raise ArgumentError("need at least 2 folds")
    if len(c_grid) == 0:
        raise ArgumentError("empty c grid")
    table = []
    for c in c_grid:
        rule = RankRule.log_rule(c, s_exponent)
        try:
            ranks = rule.resolve(y.shape, clamp=False)
        except ArgumentError as exc:
            table.append({"c": float(c), "ranks": rule.raw(y.shape), "score": math.nan,
                          "status": f"skipped: {exc}"})
            continue
        table.append({"c": float(c), "ranks": ranks, "score": 0.0, "status": "ok"})
    live = [row for row in table if row["status"] == "ok"]
    if not live:
        raise ArgumentError("every candidate c resolves to an infeasible rank")

    rng = make_rng(seed)
    fold_of = rng.permutation(y.size) % folds
    flat = y.ravel()
    cache = {}
    for f in range(folds):
        held = fold_of == f
        train = flat.copy()
        train[held] = flat[~held].mean()
        train = train.reshape(y.shape)
        for row in live:
            if row["ranks"] not in cache:
                est = dse(train, row["ranks"])[0].ravel()
                cache[row["ranks"]] = float(np.mean((est[held] - flat[held]) ** 2))
            row["score"] += cache[row["ranks"]] / folds
        cache.clear()

    best = None
    for row in sorted(live, key=lambda r: r["c"]):
        if best is None or row["score"] < best["score"] - 1e-12:
            best = row
    return best["c"], best["ranks"], table
