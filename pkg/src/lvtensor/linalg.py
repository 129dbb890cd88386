"""SVD primitives used by the estimators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericalError

# Above this size the Gram matrix gets expensive to eigendecompose and
# squaring the condition number starts to hurt; use LAPACK's SVD instead.
GRAM_LIMIT = 512


@dataclass(frozen=True)
class SvdResult:
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.T


def _check_matrix(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or 0 in a.shape:
        raise ArgumentError(f"expected a non-empty matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ArgumentError("matrix contains non-finite entries")
    return a


def canonicalize_signs(u: np.ndarray, v: np.ndarray | None = None):
    """Flip columns so the largest-magnitude entry of each column of ``u`` is positive."""
    if u.shape[1] == 0:
        return u if v is None else (u, v)
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u = u * signs
    if v is None:
        return u
    return u, v * signs


def svd_full(a) -> SvdResult:
    """Thin SVD ``a = U diag(s) V^T`` with sign-canonical columns."""
    a = _check_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD did not converge on a {a.shape[0]}x{a.shape[1]} matrix "
            f"(cond estimate {np.linalg.cond(a, p='fro'):.3e})") from exc
    u, v = canonicalize_signs(u, vt.T)
    return SvdResult(u, s, v)


def svd_top_left(a, r: int) -> np.ndarray:
    """Top-``r`` left singular vectors of ``a`` as a ``rows x r`` matrix.

    Short-fat inputs (the usual case for tensor unfoldings) go through a
    symmetric eigendecomposition of ``a a^T``; everything else through a
    thin LAPACK SVD. Columns are sign-canonicalized.
    """
    a = _check_matrix(a)
    rows, cols = a.shape
    if not 1 <= r <= min(rows, cols):
        raise ArgumentError(f"rank {r} outside [1, {min(rows, cols)}] for a {rows}x{cols} matrix")
    if rows <= cols and rows <= GRAM_LIMIT:
        gram = a @ a.T
        try:
            w, q = np.linalg.eigh(gram)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigendecomposition failed on a {rows}x{rows} Gram matrix") from exc
        u = q[:, ::-1][:, :r]
    else:
        u = svd_full(a).left[:, :r]
    return canonicalize_signs(np.ascontiguousarray(u))


def truncated_svd(a, r: int) -> np.ndarray:
    """Best rank-``r`` approximation of ``a`` in Frobenius norm."""
    res = svd_full(a)
    return (res.left[:, :r] * res.singular_values[:r]) @ res.right[:, :r].T


def orthonormality_error(u: np.ndarray) -> float:
    """``max |U^T U - I|``."""
    return float(np.max(np.abs(u.T @ u - np.eye(u.shape[1])))) if u.size else 0.0


def principal_angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Principal angles (radians) between the column spans of orthonormal ``u`` and ``v``.

    Computed from the sines (residual of ``v`` after projecting on ``u``),
    which stays accurate for nearly aligned subspaces.
    """
    s = np.linalg.svd(v - u @ (u.T @ v), compute_uv=False)
    return np.sort(np.arcsin(np.clip(s, 0.0, 1.0)))


def random_orthonormal(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
